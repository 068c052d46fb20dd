"""Exact and floating rank / elimination helpers.

Exact rank works on integer or rational matrices. When python-flint is
importable its ``fmpz_mat.rank`` does the work. The pure-Python route uses
reduction modulo a prime, which can only lose rank, so a full-rank result
mod p is already a proof of full rank over Q; anything short of that is
settled by fraction-free (Bareiss) elimination over the integers.
"""

from __future__ import annotations

from fractions import Fraction
from math import lcm
from typing import List, Optional, Sequence, Tuple

import numpy as np

try:
    import flint
except ImportError:  # pragma: no cover - exercised only without python-flint
    flint = None

PRIME = 2_147_483_647  # 2**31 - 1: products of residues fit in int64

Matrix = Sequence[Sequence]


def _as_rows(M) -> List[list]:
    if isinstance(M, np.ndarray):
        return [list(row) for row in M.tolist()] if M.ndim == 2 else []
    return [list(row) for row in M]


def to_integer_rows(M) -> List[List[int]]:
    """Scale each row by the lcm of its denominators (rank-preserving)."""
    rows = []
    for row in _as_rows(M):
        if all(isinstance(x, (int, np.integer)) for x in row):
            rows.append([int(x) for x in row])
            continue
        fr = [Fraction(x) for x in row]
        scale = lcm(*(f.denominator for f in fr)) if fr else 1
        rows.append([int(f * scale) for f in fr])
    return rows


def rank_mod_p(rows: List[List[int]], p: int = PRIME) -> int:
    if not rows or not rows[0]:
        return 0
    A = np.array([[x % p for x in row] for row in rows], dtype=np.int64)
    m, n = A.shape
    rank = 0
    for c in range(n):
        if rank == m:
            break
        nz = np.nonzero(A[rank:, c])[0]
        if nz.size == 0:
            continue
        piv = rank + int(nz[0])
        if piv != rank:
            A[[rank, piv]] = A[[piv, rank]]
        inv = pow(int(A[rank, c]), p - 2, p)
        A[rank] = (A[rank] * inv) % p
        below = A[rank + 1:, c].copy()
        mask = below != 0
        if mask.any():
            idx = np.nonzero(mask)[0] + rank + 1
            A[idx] = (A[idx] - (below[mask][:, None] * A[rank][None, :]) % p) % p
        rank += 1
    return rank


def rank_bareiss(rows: List[List[int]]) -> int:
    """Fraction-free Gaussian elimination over Z."""
    A = [row[:] for row in rows if any(row)]
    if not A:
        return 0
    m, n = len(A), len(A[0])
    rank, prev = 0, 1
    for c in range(n):
        if rank == m:
            break
        piv = next((i for i in range(rank, m) if A[i][c] != 0), None)
        if piv is None:
            continue
        A[rank], A[piv] = A[piv], A[rank]
        pr = A[rank]
        pc = pr[c]
        for i in range(rank + 1, m):
            row = A[i]
            f = row[c]
            # every entry is a minor of the input, so the division is exact
            A[i] = [(pc * row[k] - f * pr[k]) // prev for k in range(n)]
        prev = pc
        rank += 1
    return rank


def exact_rank(M, backend: Optional[str] = None) -> int:
    """Rank over Q of an integer/rational matrix (rows x cols).

    ``backend`` is ``"flint"``, ``"python"`` or None (flint when available).
    """
    rows = to_integer_rows(M)
    if not rows or not rows[0]:
        return 0
    if backend is None:
        backend = "flint" if flint is not None else "python"
    if backend == "flint":
        return int(flint.fmpz_mat(rows).rank())
    full = min(len(rows), len(rows[0]))
    if rank_mod_p(rows) == full:
        return full
    return rank_bareiss(rows)


def float_rank(M, rel_tol: float = 1e-10) -> int:
    """Numerical rank; singular values below ``rel_tol * max|entry|`` are zero."""
    A = np.asarray(M, dtype=float)
    if A.size == 0:
        return 0
    scale = np.max(np.abs(A))
    if scale == 0:
        return 0
    return int(np.linalg.matrix_rank(A, tol=rel_tol * scale))


def rref(M) -> Tuple[List[List[Fraction]], List[int]]:
    """Reduced row echelon form over Q and the pivot columns."""
    A = [[Fraction(x) for x in row] for row in _as_rows(M)]
    if not A:
        return A, []
    m, n = len(A), len(A[0])
    pivots: List[int] = []
    r = 0
    for c in range(n):
        piv = next((i for i in range(r, m) if A[i][c] != 0), None)
        if piv is None:
            continue
        A[r], A[piv] = A[piv], A[r]
        inv = 1 / A[r][c]
        A[r] = [x * inv for x in A[r]]
        for i in range(m):
            if i != r and A[i][c] != 0:
                f = A[i][c]
                A[i] = [a - f * b for a, b in zip(A[i], A[r])]
        pivots.append(c)
        r += 1
        if r == m:
            break
    return A, pivots


def nullspace(M) -> List[List[Fraction]]:
    """Basis of {x : M x = 0} over Q."""
    R, pivots = rref(M)
    n = len(R[0]) if R else 0
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for f in free:
        x = [Fraction(0)] * n
        x[f] = Fraction(1)
        for i, pc in enumerate(pivots):
            x[pc] = -R[i][f]
        basis.append(x)
    return basis


def solve_exact(M, b) -> Optional[List[Fraction]]:
    """Unique solution of ``M x = b`` over Q, or None.

    Returns None when M lacks full column rank or the system is inconsistent.
    """
    rows = _as_rows(M)
    n = len(rows[0]) if rows else 0
    aug = [list(row) + [bv] for row, bv in zip(rows, b)]
    R, pivots = rref(aug)
    if n in pivots or pivots != list(range(n)):
        return None
    return [R[i][n] for i in range(n)]
