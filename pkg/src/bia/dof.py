"""Closed-form degrees-of-freedom arithmetic.

Everything here is exact (``fractions.Fraction`` and Python integers); the
only float is the ratio against sqrt(K)/2 reported by
:func:`asymptotic_check`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from math import comb, isqrt
from typing import Dict, Iterable, List

from .errors import InfeasibleParams, MathIntegrityError

try:
    from flint import fmpz as _fmpz
except ImportError:  # pragma: no cover
    _fmpz = None


def binomial(n: int, k: int) -> int:
    """C(n, k); FLINT's binomial is much faster than math.comb for n ~ 1000."""
    if k < 0 or k > n:
        return 0
    if _fmpz is not None:
        return int(_fmpz.bin_uiui(n, k))
    return comb(n, k)


def _check_domain(K: int, r: int) -> None:
    if K < 1 or not 1 <= r <= K:
        raise InfeasibleParams(f"need K >= 1 and 1 <= r <= K, got K={K}, r={r}")


def dof_formula(K: int, r: int) -> Fraction:
    """Sum DoF ``K r / (r^2 - r + K)``."""
    _check_domain(K, r)
    return Fraction(K * r, r * r - r + K)


def optimal_r(K: int) -> int:
    """Smallest r >= 1 with ``r (r + 1) >= K``.

    This is ceil((sqrt(1+4K) - 1)/2) evaluated in integers, so perfect squares
    such as 1 + 4*6 = 25 cannot push the ceiling one step too far.
    """
    if K < 1:
        raise InfeasibleParams(f"K must be >= 1, got {K}")
    r = max(1, (isqrt(4 * K + 1) - 1) // 2)
    while r * (r + 1) < K:
        r += 1
    while r > 1 and (r - 1) * r >= K:
        r -= 1
    return r


def dof_step(K: int, r: int) -> Fraction:
    """``d(r+1) - d(r)``."""
    return dof_formula(K, r + 1) - dof_formula(K, r)


def _sign(x) -> int:
    return (x > 0) - (x < 0)


def unimodality_witness(K: int) -> List[int]:
    """Signs of ``d(r+1) - d(r)`` for r = 1..K-1.

    Raises :class:`MathIntegrityError` unless the sequence is nonnegative
    then nonpositive.
    """
    # sign of K(r+1)/D(r+1) - Kr/D(r) by cross-multiplying positive denominators
    den = lambda r: r * r - r + K
    signs = [_sign((r + 1) * den(r) - r * den(r + 1)) for r in range(1, K)]
    seen_negative = False
    for s in signs:
        if s < 0:
            seen_negative = True
        elif s > 0 and seen_negative:
            raise MathIntegrityError(f"d(r) is not unimodal for K={K}: {signs}")
    return signs


def appendix_inequality(K: int, r: int) -> int:
    """Slack ``n - (r-1)K - C(K, r)`` with ``n = C(K-1,r) + r C(K-1,r-1)``.

    At the optimal order the slack is never below -1.
    """
    _check_domain(K, r)
    # Pascal's rule C(K,r) = C(K-1,r) + C(K-1,r-1) collapses the slack to
    # (r-1)(C(K-1,r-1) - K)
    slack = (r - 1) * (binomial(K - 1, r - 1) - K)
    if r == optimal_r(K) and slack < -1:
        raise MathIntegrityError(f"slack {slack} < -1 at optimal r={r}, K={K}")
    return slack


@dataclass(frozen=True)
class DofReport:
    K: int
    r_star: int
    d_star: Fraction
    d_table: Dict[int, Fraction]
    asymptotic_ratio: float


def dof_report(K: int) -> DofReport:
    table = {r: dof_formula(K, r) for r in range(1, K + 1)}
    r_star = optimal_r(K)
    best = max(table.values())
    if table[r_star] != best:
        raise MathIntegrityError(f"optimal_r({K})={r_star} misses the maximum {best}")
    return DofReport(K=K, r_star=r_star, d_star=table[r_star], d_table=table,
                     asymptotic_ratio=half_sqrt_ratio(K, table[r_star]))


def half_sqrt_ratio(K: int, d: Fraction) -> float:
    return float(d) / (math.sqrt(K) / 2)


@dataclass(frozen=True)
class AsymptoticRow:
    K: int
    r_star: int
    d_star: Fraction
    ratio: float


def asymptotic_check(K_list: Iterable[int]) -> List[AsymptoticRow]:
    """Ratio of the optimal DoF to sqrt(K)/2 for each K.

    Along increasing K the ratio must strictly decrease toward 1; this is
    asserted whenever the given list is increasing.
    """
    rows = []
    for K in K_list:
        r = optimal_r(K)
        d = dof_formula(K, r)
        rows.append(AsymptoticRow(K=K, r_star=r, d_star=d, ratio=half_sqrt_ratio(K, d)))
    Ks = [row.K for row in rows]
    if Ks == sorted(set(Ks)):
        for a, b in zip(rows, rows[1:]):
            if not b.ratio < a.ratio:
                raise MathIntegrityError(
                    f"ratio not decreasing between K={a.K} ({a.ratio}) "
                    f"and K={b.K} ({b.ratio})")
    return rows


def achieved_ratio(K: int, r: int) -> Fraction:
    """``K C(K-1, r-1) / n``: per-block symbols over slots for the scheme."""
    _check_domain(K, r)
    n = binomial(K - 1, r) + r * binomial(K - 1, r - 1)
    return Fraction(K * binomial(K - 1, r - 1), n)


DOF_CSV_COLUMNS = ("K", "r_star", "d_star_num", "d_star_den",
                   "d_star_float", "ratio_to_half_sqrtK")


def dof_table_rows(K_values: Iterable[int]) -> List[dict]:
    rows = []
    for K in K_values:
        r = optimal_r(K)
        d = dof_formula(K, r)
        rows.append({
            "K": K, "r_star": r,
            "d_star_num": d.numerator, "d_star_den": d.denominator,
            "d_star_float": f"{float(d):.12g}",
            "ratio_to_half_sqrtK": f"{half_sqrt_ratio(K, d):.12g}",
        })
    return rows
