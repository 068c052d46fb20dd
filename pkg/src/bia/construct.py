"""Binary precoders and receiver switching patterns.

Users are labelled ``1..K`` throughout the public API; subsets of users are
sorted tuples of those labels. Array rows/columns are of course 0-based, so
user ``q`` lives in column ``q - 1``.

The basis matrix ``S`` (n x K) stacks ``r - 1`` copies of ``A = 1 - I`` on
top of a block ``B`` whose rows have exactly ``K - r`` ones. The precoder
column owned by an r-subset ``T`` of transmitters is the entrywise product
of the columns of ``S`` indexed by the complement of ``T``; every member of
``T`` uses it, which is what makes the vector "shared".
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from itertools import combinations
from math import comb
from typing import Dict, List, Optional, Tuple

import numpy as np

from .errors import ConstructionError, InfeasibleParams

Subset = Tuple[int, ...]


class Mode(str, enum.Enum):
    PAPER_EXACT = "paper-exact"
    PADDED = "padded"


def slot_count(K: int, r: int, mode: Mode | str = Mode.PAPER_EXACT) -> int:
    mode = Mode(mode)
    if mode is Mode.PADDED:
        return (r - 1) * K + comb(K, r)
    return comb(K - 1, r) + r * comb(K - 1, r - 1)


def b_row_slack(K: int, r: int) -> int:
    """``n - (r-1)K - C(K, r)`` for the paper-exact slot count."""
    return slot_count(K, r) - (r - 1) * K - comb(K, r)


def default_order(K: int) -> int:
    """Smallest r >= 1 with r(r+1) >= K, i.e. ceil((sqrt(1+4K)-1)/2)."""
    from .dof import optimal_r

    return optimal_r(K)


@dataclass(frozen=True)
class SchemeParams:
    K: int
    r: int
    mode: Mode
    n: int

    @property
    def d(self) -> int:
        """Symbols per user, C(K-1, r-1)."""
        return comb(self.K - 1, self.r - 1)

    @property
    def a_rows(self) -> int:
        return (self.r - 1) * self.K

    @property
    def b_rows(self) -> int:
        return self.n - self.a_rows

    @property
    def subsets(self) -> List[Subset]:
        """All r-subsets of ``1..K`` in lexicographic order."""
        return [tuple(s) for s in combinations(range(1, self.K + 1), self.r)]

    def subsets_containing(self, q: int) -> List[Subset]:
        return [T for T in self.subsets if q in T]

    def to_dict(self) -> dict:
        return {"K": self.K, "r": self.r, "mode": self.mode.value, "n": self.n}

    @classmethod
    def from_dict(cls, data: dict) -> "SchemeParams":
        params = derive_params(int(data["K"]), int(data["r"]), data["mode"])
        if "n" in data and int(data["n"]) != params.n:
            raise InfeasibleParams(
                f"serialized n={data['n']} disagrees with derived n={params.n}"
            )
        return params


def derive_params(K: int, r: Optional[int] = None,
                  mode: Mode | str = Mode.PAPER_EXACT) -> SchemeParams:
    """Validate (K, r, mode) and compute the slot count n.

    ``r`` defaults to the DoF-optimal order. Paper-exact mode additionally
    requires ``n - (r-1)K - C(K, r) >= -1``, i.e. at most one r-subset may
    go without a private B row.
    """
    try:
        mode = Mode(mode)
    except ValueError:
        raise InfeasibleParams(f"unknown construction mode {mode!r}") from None
    if not isinstance(K, (int, np.integer)) or K < 1:
        raise InfeasibleParams(f"K must be a positive integer, got {K!r}")
    K = int(K)
    if r is None:
        r = default_order(K)
    if not isinstance(r, (int, np.integer)) or not 1 <= r <= K:
        raise InfeasibleParams(f"r must satisfy 1 <= r <= K={K}, got {r!r}")
    r = int(r)
    if mode is Mode.PAPER_EXACT:
        slack = b_row_slack(K, r)
        if slack < -1:
            raise InfeasibleParams(
                f"paper-exact mode needs n - (r-1)K - C(K,r) >= -1, "
                f"got {slack} for K={K}, r={r}"
            )
    return SchemeParams(K=K, r=r, mode=mode, n=slot_count(K, r, mode))


@dataclass(frozen=True)
class BasisMatrix:
    entries: np.ndarray           # n x K, values in {0, 1}
    b_supports: List[Subset]      # support of each non-idle B row
    a_block_count: int
    idle_rows: int = 0            # trailing all-zero B rows

    @property
    def b_block(self) -> np.ndarray:
        return self.entries[self.a_block_count * self.entries.shape[1]:]

    def column(self, j: int) -> np.ndarray:
        return self.entries[:, j - 1]


def _complement(T: Subset, K: int) -> Subset:
    return tuple(i for i in range(1, K + 1) if i not in T)


def b_row_supports(params: SchemeParams) -> Tuple[List[Subset], int]:
    """Supports of the B rows, in row order, plus the number of idle rows.

    Paper-exact: rows follow the lexicographic order of the r-subset each
    row serves (its complement), and surplus subsets are dropped from the
    end of that list. Padded: all (K-r)-subsets in lexicographic order.
    """
    K, r = params.K, params.r
    if params.mode is Mode.PADDED:
        return [tuple(s) for s in combinations(range(1, K + 1), K - r)], 0
    supports = [_complement(T, K) for T in params.subsets]
    rows = params.b_rows
    if rows <= len(supports):
        return supports[:rows], 0
    # Only C(K, r) distinct weight-(K-r) rows exist; the rest carry nothing.
    return supports, rows - len(supports)


def build_basis(params: SchemeParams) -> BasisMatrix:
    K = params.K
    A = np.ones((K, K), dtype=np.int64) - np.eye(K, dtype=np.int64)
    supports, idle = b_row_supports(params)
    B = np.zeros((len(supports) + idle, K), dtype=np.int64)
    for i, sup in enumerate(supports):
        B[i, [j - 1 for j in sup]] = 1
    S = np.vstack([A] * (params.r - 1) + [B]) if params.r > 1 else B
    if S.shape != (params.n, K):
        raise ConstructionError(f"basis has shape {S.shape}, expected {(params.n, K)}")
    S.setflags(write=False)
    return BasisMatrix(entries=S, b_supports=supports,
                       a_block_count=params.r - 1, idle_rows=idle)


def hadamard_columns(basis: BasisMatrix, cols: Subset) -> np.ndarray:
    """Entrywise product of the given (1-based) columns; empty -> all ones."""
    S = basis.entries
    out = np.ones(S.shape[0], dtype=np.int64)
    for j in cols:
        out = out * S[:, j - 1]
    return out


@dataclass(frozen=True)
class SharedVector:
    subset: Subset
    vector: np.ndarray
    columns: Dict[int, int]       # transmitter -> 1-based column index


@dataclass(frozen=True)
class PrecoderSet:
    params: SchemeParams
    matrices: Dict[int, np.ndarray]          # q -> n x d
    column_subsets: Dict[int, List[Subset]]  # q -> subset owning each column
    shared_index: Dict[Subset, SharedVector] = field(repr=False)

    def matrix(self, q: int) -> np.ndarray:
        return self.matrices[q]

    def column(self, q: int, d: int) -> np.ndarray:
        return self.matrices[q][:, d - 1]


def build_precoders(basis: BasisMatrix, params: SchemeParams) -> PrecoderSet:
    K = params.K
    if basis.entries.shape != (params.n, K):
        raise ConstructionError("basis matrix does not match scheme parameters")
    vectors = {T: hadamard_columns(basis, _complement(T, K)) for T in params.subsets}

    seen: Dict[bytes, Subset] = {}
    for T, v in vectors.items():
        key = v.tobytes()
        if key in seen:
            raise ConstructionError(
                f"subsets {list(seen[key])} and {list(T)} generate the same "
                f"precoder column"
            )
        seen[key] = T

    matrices, column_subsets = {}, {}
    positions: Dict[Subset, Dict[int, int]] = {T: {} for T in vectors}
    for q in range(1, K + 1):
        owned = params.subsets_containing(q)
        M = np.column_stack([vectors[T] for T in owned])
        M.setflags(write=False)
        matrices[q] = M
        column_subsets[q] = owned
        for d, T in enumerate(owned, start=1):
            positions[T][q] = d
        if M.shape[1] != params.d:
            raise ConstructionError(f"transmitter {q} has {M.shape[1]} columns, "
                                    f"expected {params.d}")

    shared = {}
    for T, v in vectors.items():
        v.setflags(write=False)
        shared[T] = SharedVector(subset=T, vector=v, columns=positions[T])
    return PrecoderSet(params=params, matrices=matrices,
                       column_subsets=column_subsets, shared_index=shared)


@dataclass(frozen=True)
class SwitchingPlan:
    sw: np.ndarray   # n x K, modes in {0..r-1}
    r: int

    def pattern(self, p: int) -> np.ndarray:
        return self.sw[:, p - 1]


def block_mode(j: int) -> int:
    """Diagonal mode of A-block j (1-based): 0 for the first, j afterwards."""
    return 0 if j == 1 else j


def build_switching(params: SchemeParams) -> SwitchingPlan:
    K = params.K
    if params.r == 1:
        # a single antenna mode: nothing to switch
        sw = np.zeros((params.n, K), dtype=np.int64)
    else:
        basis = build_basis(params)
        A = np.ones((K, K), dtype=np.int64) - np.eye(K, dtype=np.int64)
        blocks = [A + block_mode(j) * np.eye(K, dtype=np.int64)
                  for j in range(1, params.r)]
        sw = np.vstack(blocks + [basis.b_block])
    sw.setflags(write=False)
    return SwitchingPlan(sw=sw, r=params.r)


@dataclass(frozen=True)
class Construction:
    """Everything the transmitters and receivers need, built in one go."""

    params: SchemeParams
    basis: BasisMatrix
    precoders: PrecoderSet
    switching: SwitchingPlan


def construct(K: int, r: Optional[int] = None,
              mode: Mode | str = Mode.PAPER_EXACT) -> Construction:
    params = derive_params(K, r, mode)
    basis = build_basis(params)
    return Construction(params=params, basis=basis,
                        precoders=build_precoders(basis, params),
                        switching=build_switching(params))
