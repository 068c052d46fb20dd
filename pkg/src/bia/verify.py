"""Rank-based proofs of the alignment scheme's structural claims.

For one (construction, channel) pair the checks establish that

* each transmitter's precoder columns are linearly independent,
* a shared vector arrives along a single direction at every receiver
  outside its r-subset,
* the r copies of a shared vector stay independent at receivers inside it,
* the desired signal space does not intersect the interference space,

and the census counts the dimensions each group of signals occupies.

Ranks are exact by default. Floating-point ranks are accepted only when they
confirm the expected value; any shortfall is recomputed exactly before a
check is declared failed.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from math import comb
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np

from .channel import (ReceivedBasis, Representation, draw_channel,
                      received_basis)
from .construct import Construction, Mode, PrecoderSet, SchemeParams, Subset
from .errors import (CensusError, ConverseAuditError, DecodabilityError,
                     LemmaViolation)
from .linalg import exact_rank, float_rank


@dataclass
class CheckReport:
    check: str
    passed: bool
    applicable: bool = True
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def _columns_rank(columns: Sequence[np.ndarray], exact: bool,
                  expected: Optional[int] = None) -> int:
    """Rank of a set of column vectors.

    Float ranks that disagree with ``expected`` are settled exactly (floats
    convert to rationals without rounding).
    """
    if not columns:
        return 0
    rows = [list(c) for c in columns]
    if exact:
        return exact_rank(rows)
    rk = float_rank(np.array(rows, dtype=float))
    if expected is not None and rk != expected:
        rk = exact_rank([[Fraction(float(x)) for x in row] for row in rows])
    return rk


def _dependent_prefix(columns: List[np.ndarray], exact: bool) -> List[int]:
    """1-based indices of the shortest dependent prefix, for failure reports."""
    for k in range(1, len(columns) + 1):
        if _columns_rank(columns[:k], exact=True) < k:
            return list(range(1, k + 1))
    return []


def check_tx_independence(precoders: PrecoderSet, q: int) -> CheckReport:
    V = precoders.matrix(q)
    cols = [V[:, k] for k in range(V.shape[1])]
    expected = precoders.params.d
    rank = _columns_rank(cols, exact=True)
    report = CheckReport("tx_independence", rank == expected,
                         details={"transmitter": q, "rank": rank, "expected": expected})
    if not report.passed:
        report.details["witness_columns"] = _dependent_prefix(cols, exact=True)
        raise LemmaViolation(f"precoder of transmitter {q} has rank {rank} < {expected}",
                             report)
    return report


def check_alignment(received: ReceivedBasis, subset: Subset,
                    l: Optional[int]) -> CheckReport:
    """Images of the subset's shared vector at receiver ``l`` span span{v}."""
    subset = tuple(subset)
    if l is None:
        return CheckReport("alignment", True, applicable=False,
                           details={"subset": list(subset)})
    if l in subset:
        raise ValueError(f"receiver {l} belongs to subset {list(subset)}")
    v = received.precoders.shared_index[subset].vector
    images = [received.shared_image(l, m, subset) for m in subset]
    dim = _columns_rank(images, received.exact, expected=1)
    joint = _columns_rank(images + [v], received.exact, expected=1)
    passed = dim == 1 and joint == 1
    report = CheckReport("alignment", passed, details={
        "subset": list(subset), "receiver": l, "dim": dim, "dim_with_v": joint})
    if not passed:
        raise LemmaViolation(
            f"shared vector of {list(subset)} occupies {dim} dimensions at receiver {l}",
            report)
    return report


def check_shared_independence(received: ReceivedBasis, subset: Subset) -> CheckReport:
    """At every receiver inside the subset its r images have rank r."""
    subset = tuple(subset)
    r = len(subset)
    ranks = {}
    for l in subset:
        images = [received.shared_image(l, m, subset) for m in subset]
        ranks[l] = _columns_rank(images, received.exact, expected=r)
    bad = [l for l, rk in ranks.items() if rk != r]
    report = CheckReport("shared_independence", not bad, details={
        "subset": list(subset), "ranks": {str(l): rk for l, rk in ranks.items()},
        "expected": r})
    if bad:
        raise LemmaViolation(
            f"copies of the shared vector of {list(subset)} are dependent at "
            f"receiver(s) {bad}", report)
    return report


def interference_representatives(received: ReceivedBasis, j: int) -> List[np.ndarray]:
    """One image per foreign subset plus every foreign copy of j's shared vectors."""
    reps = []
    for T in received.params.subsets:
        if j in T:
            reps.extend(received.shared_image(j, m, T) for m in T if m != j)
        else:
            reps.append(received.shared_image(j, T[0], T))
    return reps


def check_desired_clean(received: ReceivedBasis, j: int) -> CheckReport:
    params = received.params
    K, r, d = params.K, params.r, params.d
    desired = [received.vector(j, j, k) for k in range(1, d + 1)]
    interf = interference_representatives(received, j)
    interf_dims = (r - 1) * d + comb(K - 1, r)
    expected = d + interf_dims
    joint = _columns_rank(desired + interf, received.exact, expected=expected)
    details = {"receiver": j, "desired_dims": d, "interference_dims": interf_dims,
               "joint_rank": joint, "expected": expected}
    if joint != expected:
        d_rank = _columns_rank(desired, received.exact, expected=d)
        i_rank = _columns_rank(interf, received.exact, expected=interf_dims)
        details.update(desired_rank=d_rank, interference_rank=i_rank,
                       intersection_dim=d_rank + i_rank - joint)
    report = CheckReport("desired_clean", joint == expected, details=details)
    if not report.passed:
        raise DecodabilityError(
            f"receiver {j}: joint rank {joint} < {expected}; desired space "
            f"overlaps interference in {details['intersection_dim']} dimension(s)",
            report)
    return report


@dataclass
class DimensionCensus:
    receiver: int
    desired_dims: int
    shared_with_j_dims: int
    aligned_foreign_dims: int
    total_occupied: int
    slot_budget: int
    subset_dims: Dict[Subset, int]

    def as_tuple(self) -> tuple:
        return (self.desired_dims, self.shared_with_j_dims,
                self.aligned_foreign_dims, self.total_occupied)

    def to_dict(self) -> dict:
        out = {k: v for k, v in asdict(self).items() if k != "subset_dims"}
        out["subset_dims"] = [{"subset": list(T), "dims": v}
                              for T, v in sorted(self.subset_dims.items())]
        return out


def expected_census(params: SchemeParams) -> tuple:
    d = params.d
    foreign = comb(params.K - 1, params.r)
    return (d, params.r * d, foreign, params.r * d + foreign)


def census_mismatches(census: DimensionCensus, params: SchemeParams) -> List[str]:
    names = ("desired", "shared_with_j", "aligned_foreign", "total")
    out = [f"{name}: measured {got}, expected {want}"
           for name, got, want in zip(names, census.as_tuple(), expected_census(params))
           if got != want]
    if census.total_occupied > params.n:
        out.append(f"total {census.total_occupied} exceeds n={params.n}")
    if params.mode is Mode.PAPER_EXACT and census.total_occupied != params.n:
        out.append(f"total {census.total_occupied} != n={params.n}")
    return out


def dimension_census(received: ReceivedBasis, j: int, strict: bool = True) -> DimensionCensus:
    """Exact dimension counts of the signal groups seen at receiver j."""
    params = received.params
    exact = received.exact
    want = expected_census(params)
    desired = [received.vector(j, j, k) for k in range(1, params.d + 1)]
    own, foreign = [], []
    subset_dims = {}
    for T in params.subsets:
        images = [received.shared_image(j, m, T) for m in T]
        if j in T:
            own.extend(images)
        else:
            foreign.extend(images)
            subset_dims[T] = _columns_rank(images, exact, expected=1)
    everything = [received.matrices[j][:, c] for c in range(len(received))]
    census = DimensionCensus(
        receiver=j,
        desired_dims=_columns_rank(desired, exact, expected=want[0]),
        shared_with_j_dims=_columns_rank(own, exact, expected=want[1]),
        aligned_foreign_dims=_columns_rank(foreign, exact, expected=want[2]),
        total_occupied=_columns_rank(everything, exact, expected=want[3]),
        slot_budget=params.n,
        subset_dims=subset_dims,
    )
    if strict:
        bad = census_mismatches(census, params)
        if bad:
            raise CensusError(f"receiver {j}: " + "; ".join(bad), census)
    return census


@dataclass
class AuditReport:
    passed: bool
    lhs: Dict[int, int]
    slack: Dict[int, int]

    def to_dict(self) -> dict:
        return {"passed": self.passed,
                "lhs": {str(j): v for j, v in self.lhs.items()},
                "slack": {str(j): v for j, v in self.slack.items()}}


def audit_converse_inequalities(censuses: Sequence[DimensionCensus],
                                params: SchemeParams) -> AuditReport:
    """Per-receiver counting bound ``sum_i d_i - (r-1) sum_T d_T <= n``.

    ``d_i`` is user i's desired dimension count, ``d_T`` the dimensions the
    foreign subset T occupies at the receiver.
    """
    by_rx = {c.receiver: c for c in censuses}
    if sorted(by_rx) != list(range(1, params.K + 1)):
        raise ValueError("audit needs one census per receiver")
    total_d = sum(c.desired_dims for c in by_rx.values())
    lhs, slack = {}, {}
    for j, c in sorted(by_rx.items()):
        lhs[j] = total_d - (params.r - 1) * sum(c.subset_dims.values())
        slack[j] = params.n - lhs[j]
    report = AuditReport(passed=all(s >= 0 for s in slack.values()), lhs=lhs, slack=slack)
    if not report.passed:
        bad = [j for j, s in slack.items() if s < 0]
        raise ConverseAuditError(f"counting bound violated at receivers {bad}", report)
    return report


def _attempt(fn, *args):
    try:
        return fn(*args), None
    except (LemmaViolation, DecodabilityError, CensusError, ConverseAuditError) as err:
        return err.report, str(err)


def verify_channel(cons: Construction, received: ReceivedBasis,
                   seed: Optional[int] = None) -> dict:
    """Run every channel-dependent check for one realization."""
    params = cons.params
    K = params.K
    failures: List[dict] = []

    def record(report, err):
        if err is not None:
            failures.append({"check": report.check, "error": err})
        return report

    n_align = n_shared = 0
    for T in params.subsets:
        outside = [l for l in range(1, K + 1) if l not in T]
        for l in outside:
            record(*_attempt(check_alignment, received, T, l))
            n_align += 1
        record(*_attempt(check_shared_independence, received, T))
        n_shared += 1

    clean = []
    for j in range(1, K + 1):
        rep, err = _attempt(check_desired_clean, received, j)
        record(rep, err)
        clean.append(rep.to_dict())

    censuses, census_ok = [], []
    for j in range(1, K + 1):
        c = dimension_census(received, j, strict=False)
        censuses.append(c)
        bad = census_mismatches(c, params)
        census_ok.append(not bad)
        if bad:
            failures.append({"check": "census", "error": f"receiver {j}: " + "; ".join(bad)})

    audit, err = _attempt(audit_converse_inequalities, censuses, params)
    if err is not None:
        failures.append({"check": "converse_audit", "error": err})

    names = ["alignment", "shared_independence", "desired_clean"]
    status = {name: not any(f["check"] == name for f in failures) for name in names}
    status["census"] = all(census_ok)
    status["converse_audit"] = audit.passed
    if K == params.r:
        status["alignment_applicable"] = False
    return {
        "seed": seed,
        "status": status,
        "checked": {"alignment": n_align, "shared_independence": n_shared},
        "desired_clean": clean,
        "census": [c.to_dict() for c in censuses],
        "audit": audit.to_dict(),
        "failures": failures,
    }


def _verify_one(args) -> dict:
    cons, seed, representation = args
    ch = draw_channel(cons.params, seed, representation)
    rb = received_basis(ch, cons.switching, cons.precoders)
    return verify_channel(cons, rb, seed)


def worker_count(requested: Optional[int] = None) -> int:
    cap = os.environ.get("BIA_THREADS")
    n = requested if requested is not None else (os.cpu_count() or 1)
    if cap:
        n = min(n, max(1, int(cap)))
    return max(1, n)


def verify_construction(cons: Construction, seeds: Iterable[int],
                        representation: Representation | str = Representation.EXACT,
                        workers: Optional[int] = 1) -> dict:
    """Full verification report over several channel seeds.

    Results are ordered by seed position whatever the worker count.
    """
    representation = Representation(representation)
    seeds = [int(s) for s in seeds]
    tx = [_attempt(check_tx_independence, cons.precoders, q)
          for q in range(1, cons.params.K + 1)]
    jobs = [(cons, s, representation) for s in seeds]
    nworkers = worker_count(workers)
    if nworkers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=nworkers) as pool:
            per_seed = list(pool.map(_verify_one, jobs))
    else:
        per_seed = [_verify_one(job) for job in jobs]

    summary = {"tx_independence": all(err is None for _, err in tx)}
    for key in ("alignment", "shared_independence", "desired_clean", "census",
                "converse_audit"):
        summary[key] = all(s["status"][key] for s in per_seed)
    failing_seeds = {key: [s["seed"] for s in per_seed if not s["status"][key]]
                     for key in summary if key != "tx_independence"}
    return {
        "schema": 1,
        "kind": "verification",
        "params": cons.params.to_dict(),
        "representation": representation.value,
        "seeds": seeds,
        "tx_independence": [rep.to_dict() for rep, _ in tx],
        "per_seed": per_seed,
        "summary": summary,
        "failing_seeds": failing_seeds,
        "passed": all(summary.values()),
    }
