"""Zero-forcing decoding and high-SNR rate / DoF-slope estimation."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence

import numpy as np

from .channel import (ReceivedBasis, Representation, draw_channel,
                      received_basis)
from .construct import Construction, SchemeParams
from .errors import DecodabilityError
from .linalg import exact_rank, float_rank, nullspace, solve_exact
from .seeding import SIMULATION, derive_seed

log = logging.getLogger(__name__)

DEFAULT_SNR_DB = (40.0, 50.0, 60.0, 70.0, 80.0)
LOG2_10 = math.log2(10.0)


def _split(received: ReceivedBasis, j: int):
    d = received.params.d
    M = received.matrices[j]
    lo, hi = (j - 1) * d, j * d
    desired = M[:, lo:hi]
    interference = np.concatenate([M[:, :lo], M[:, hi:]], axis=1)
    return desired, interference


def zero_force_decode(observation, j: int, received: ReceivedBasis) -> list:
    """Recover receiver j's symbols by projecting out all interference.

    Exact inputs (ints/Fractions, exact received basis) give exact Fractions.
    Raises :class:`DecodabilityError` when the projected desired channel has
    fewer than d independent columns.
    """
    d = received.params.d
    desired, interference = _split(received, j)
    exact = received.exact and all(
        isinstance(x, (int, Fraction, np.integer)) for x in observation)
    if exact:
        # rows of N span the left null space of the interference matrix
        N = nullspace(interference.T.tolist()) if interference.size else \
            [[Fraction(int(i == k)) for i in range(len(observation))]
             for k in range(len(observation))]
        G = [[sum(w[i] * desired[i, c] for i in range(len(w))) for c in range(d)]
             for w in N]
        b = [sum(w[i] * observation[i] for i in range(len(w))) for w in N]
        x = solve_exact(G, b) if G else None
        if x is None:
            rank = exact_rank(G) if G else 0
            raise DecodabilityError(
                f"receiver {j}: projected desired channel has rank {rank} < {d}",
                {"receiver": j, "rank": rank, "expected": d})
        return x
    G, b = _project(np.asarray(desired, float), np.asarray(interference, float),
                    np.asarray(observation, float))
    rank = float_rank(G) if G.size else 0
    if rank < d:
        raise DecodabilityError(
            f"receiver {j}: projected desired channel has rank {rank} < {d}",
            {"receiver": j, "rank": rank, "expected": d})
    return list(np.linalg.lstsq(G, b, rcond=None)[0])


def _complement_basis(interference: np.ndarray, n: int) -> np.ndarray:
    """Orthonormal basis (n x k) of the orthogonal complement of the columns."""
    if interference.size == 0:
        return np.eye(n)
    U, s, _ = np.linalg.svd(interference, full_matrices=True)
    tol = 1e-10 * max(s.max(initial=0.0), np.abs(interference).max())
    rank = int(np.sum(s > tol))
    return U[:, rank:]


def _project(desired: np.ndarray, interference: np.ndarray, y: np.ndarray):
    Q = _complement_basis(interference, desired.shape[0])
    return Q.T @ desired, Q.T @ y


def projected_channels(received: ReceivedBasis) -> List[np.ndarray]:
    """Post-projection desired channel per receiver (float)."""
    out = []
    for j in range(1, received.params.K + 1):
        desired, interference = _split(received, j)
        G, _ = _project(np.asarray(desired, float), np.asarray(interference, float),
                        np.zeros(received.params.n))
        out.append(G)
    return out


@dataclass(frozen=True)
class SimulationConfig:
    params: SchemeParams
    seeds: Sequence[int] = (0,)
    snr_db: Sequence[float] = DEFAULT_SNR_DB
    trials_per_point: int = 1
    decoder: str = "zero-forcing"

    def __post_init__(self):
        if not self.snr_db:
            raise ValueError("snr_db must be nonempty")
        if any(b <= a for a, b in zip(self.snr_db, self.snr_db[1:])):
            raise ValueError("snr_db must be strictly increasing")
        if self.trials_per_point < 1:
            raise ValueError("trials_per_point must be >= 1")
        if self.decoder != "zero-forcing":
            raise ValueError(f"unsupported decoder {self.decoder!r}")


@dataclass
class RatePoint:
    snr_db: float
    user_rates: List[float]

    @property
    def sum_rate(self) -> float:
        return float(sum(self.user_rates))


@dataclass
class RateCurve:
    params: SchemeParams
    points: List[RatePoint]
    slope_estimate: Optional[float] = None
    census_dof: Optional[Fraction] = None
    realizations: int = 0
    notes: List[str] = field(default_factory=list)

    def csv_rows(self) -> List[dict]:
        rows = []
        for pt in self.points:
            for q, rate in enumerate(pt.user_rates, start=1):
                rows.append({"snr_db": f"{pt.snr_db:g}", "user": q,
                             "rate": f"{rate:.12g}", "sum_rate": f"{pt.sum_rate:.12g}"})
        return rows


def per_symbol_power(snr: float, precoders, q: int, n: int) -> float:
    """Equal per-symbol power giving block-average transmit power ``snr``."""
    V = precoders.matrix(q)
    return snr * n / float(np.sum(V.astype(float) ** 2))


def realization_rates(cons: Construction, received: ReceivedBasis,
                      snr_lin: Sequence[float]) -> np.ndarray:
    """Rates (bits/slot) with shape (len(snr), K) for one channel draw.

    Gaussian inputs, unit-power white noise; the zero-forced channel of
    receiver j has mutual information ``log2 det(I + P G^T G)``.
    """
    params = cons.params
    Gs = projected_channels(received)
    out = np.zeros((len(snr_lin), params.K))
    for j, G in enumerate(Gs, start=1):
        # log det(I + P G^T G) = sum log(1 + P s_i^2)
        sv = np.linalg.svd(G, compute_uv=False) if G.size else np.zeros(0)
        for i, snr in enumerate(snr_lin):
            P = per_symbol_power(snr, cons.precoders, j, params.n)
            out[i, j - 1] = np.sum(np.log2(1.0 + P * sv ** 2)) / params.n
    return out


def achieved_census_dof(received: ReceivedBasis) -> Fraction:
    """Sum over receivers of decodable dimensions, per slot (exact ranks)."""
    params = received.params
    total = 0
    for j in range(1, params.K + 1):
        desired, interference = _split(received, j)
        joint = exact_rank(np.concatenate([desired, interference], axis=1).T.tolist())
        i_rank = exact_rank(interference.T.tolist()) if interference.size else 0
        total += joint - i_rank
    return Fraction(total, params.n)


def _trial_seeds(config: SimulationConfig) -> List[int]:
    return [derive_seed(s, SIMULATION, t) for s in config.seeds
            for t in range(config.trials_per_point)]


def simulate_rates(config: SimulationConfig, cons: Optional[Construction] = None,
                   noise_free: bool = False) -> RateCurve:
    """Average per-user rates over all (seed, trial) channel draws.

    With ``noise_free`` the rates are unbounded; the curve then carries the
    exact rank-census DoF as its slope instead.
    """
    from .construct import build_basis, build_precoders, build_switching

    params = config.params
    if cons is None:
        basis = build_basis(params)
        cons = Construction(params, basis, build_precoders(basis, params),
                            build_switching(params))
    seeds = _trial_seeds(config)
    if noise_free:
        dofs = []
        for s in seeds:
            ch = draw_channel(params, s, Representation.EXACT)
            dofs.append(achieved_census_dof(received_basis(ch, cons.switching,
                                                           cons.precoders)))
        dof = min(dofs)
        pts = [RatePoint(x, [math.inf] * params.K) for x in config.snr_db]
        return RateCurve(params, pts, slope_estimate=float(dof), census_dof=dof,
                         realizations=len(seeds), notes=["noise-free: slope from rank census"])

    snr_lin = [10.0 ** (x / 10.0) for x in config.snr_db]
    acc = np.zeros((len(snr_lin), params.K))
    for s in seeds:  # seed-ordered reduction keeps results reproducible
        ch = draw_channel(params, s, Representation.FLOAT)
        rb = received_basis(ch, cons.switching, cons.precoders)
        rates = realization_rates(cons, rb, snr_lin)
        if not np.all(np.isfinite(rates)):
            log.warning("non-finite rate for channel seed %d", s)
        acc += rates
    acc /= len(seeds)
    pts = [RatePoint(x, [float(v) for v in acc[i]]) for i, x in enumerate(config.snr_db)]
    curve = RateCurve(params, pts, realizations=len(seeds))
    if len(pts) >= 2 and config.snr_db[-1] - config.snr_db[0] >= 20 and \
            config.snr_db[-1] >= 40:
        curve.slope_estimate = estimate_dof_slope(curve)
    return curve


def estimate_dof_slope(curve: RateCurve, top: int = 3) -> float:
    """Least-squares slope of sum rate against log2(SNR) over the top points."""
    pts = curve.points
    if len(pts) < 2:
        raise ValueError("need at least two SNR points")
    span = pts[-1].snr_db - pts[0].snr_db
    if span < 20 or pts[-1].snr_db < 40:
        raise ValueError(f"SNR ladder must span >= 20 dB and reach 40 dB "
                         f"(got {pts[0].snr_db}..{pts[-1].snr_db} dB)")
    use = pts[-top:] if len(pts) > top else pts
    x = np.array([p.snr_db / 10.0 * LOG2_10 for p in use])
    y = np.array([p.sum_rate for p in use])
    slope, _ = np.polyfit(x, y, 1)
    return float(slope)
