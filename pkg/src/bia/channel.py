"""Channel realizations and the switched diagonal channel model.

Each link (p, q) has one real coefficient per antenna mode. Receiver p's
switching pattern picks, slot by slot, which mode (hence which coefficient)
every incoming link experiences, so the per-link channel over a block is a
diagonal matrix whose diagonal is ``coeffs[p, q, SW_p]``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Sequence, Tuple

import numpy as np

from .construct import PrecoderSet, SchemeParams, Subset, SwitchingPlan
from .errors import DimensionMismatch
from .seeding import NOISE, rng_for

EXACT_MAX = 2 ** 16
FLOAT_LOW, FLOAT_HIGH = 0.5, 2.0


class Representation(str, enum.Enum):
    EXACT = "exact-rational"
    FLOAT = "floating"


@dataclass(frozen=True)
class ChannelRealization:
    params: SchemeParams
    coeffs: np.ndarray            # K x K x r; Python ints (object) or float64
    representation: Representation
    seed: int

    @property
    def exact(self) -> bool:
        return self.representation is Representation.EXACT

    def coeff(self, p: int, q: int, mode: int):
        return self.coeffs[p - 1, q - 1, mode]

    def to_dict(self) -> dict:
        vals = self.coeffs.tolist()
        return {"params": self.params.to_dict(), "seed": self.seed,
                "representation": self.representation.value, "coeffs": vals}


def _distinct_draws(draw, size: int) -> list:
    vals = list(draw(size))
    while len(set(vals)) < size:
        seen, fresh = set(), []
        for v in vals:
            if v in seen:
                v = draw(1)[0]
            seen.add(v)
            fresh.append(v)
        vals = fresh
    return vals


def draw_channel(params: SchemeParams, seed: int,
                 representation: Representation | str = Representation.EXACT
                 ) -> ChannelRealization:
    """Sample nonzero coefficients with pairwise-distinct modes per link.

    Exact mode draws integers uniformly from [1, 2**16]; floating mode draws
    from U[0.5, 2.0]. Colliding mode values of one link are redrawn.
    """
    representation = Representation(representation)
    rng = np.random.default_rng(seed)
    K, r = params.K, params.r
    if representation is Representation.EXACT:
        coeffs = np.empty((K, K, r), dtype=object)
        draw = lambda k: [int(x) for x in rng.integers(1, EXACT_MAX + 1, size=k)]
    else:
        coeffs = np.empty((K, K, r), dtype=np.float64)
        draw = lambda k: [float(x) for x in rng.uniform(FLOAT_LOW, FLOAT_HIGH, size=k)]
    for p in range(K):
        for q in range(K):
            coeffs[p, q, :] = _distinct_draws(draw, r)
    coeffs.setflags(write=False)
    return ChannelRealization(params=params, coeffs=coeffs,
                              representation=representation, seed=int(seed))


def channel_from_dict(data: dict) -> ChannelRealization:
    params = SchemeParams.from_dict(data["params"])
    rep = Representation(data["representation"])
    if rep is Representation.EXACT:
        arr = np.empty((params.K, params.K, params.r), dtype=object)
        arr[...] = [[[int(x) for x in modes] for modes in row] for row in data["coeffs"]]
    else:
        arr = np.asarray(data["coeffs"], dtype=np.float64)
    arr.setflags(write=False)
    return ChannelRealization(params=params, coeffs=arr, representation=rep,
                              seed=int(data["seed"]))


def _check_user(K: int, *users: int) -> None:
    for u in users:
        if not 1 <= u <= K:
            raise IndexError(f"user index {u} outside 1..{K}")


def diagonal_channel(ch: ChannelRealization, sw_plan: SwitchingPlan,
                     p: int, q: int) -> np.ndarray:
    """Diagonal of the n x n channel from transmitter q to receiver p."""
    K = ch.params.K
    _check_user(K, p, q)
    if sw_plan.sw.shape != (ch.params.n, K):
        raise DimensionMismatch("switching plan does not match channel parameters")
    return ch.coeffs[p - 1, q - 1, sw_plan.pattern(p)]


@dataclass(frozen=True)
class ReceivedBasis:
    """Noiseless images of every precoder column at every receiver.

    ``matrices[p]`` is n x (K d); column ``(q-1)*d + (k-1)`` is
    ``diag(H^[pq]) * v_k^[q]``. ``labels`` gives (q, k, subset) per column.
    """

    params: SchemeParams
    precoders: PrecoderSet
    matrices: dict
    labels: List[Tuple[int, int, Subset]]
    exact: bool

    def vector(self, p: int, q: int, k: int) -> np.ndarray:
        return self.matrices[p][:, (q - 1) * self.params.d + (k - 1)]

    def columns_from(self, p: int, q: int) -> np.ndarray:
        d = self.params.d
        return self.matrices[p][:, (q - 1) * d: q * d]

    def shared_image(self, p: int, q: int, subset: Subset) -> np.ndarray:
        """Image at receiver p of the subset's shared vector sent by q."""
        k = self.precoders.shared_index[subset].columns[q]
        return self.vector(p, q, k)

    def __len__(self) -> int:
        return len(self.labels)


def _same_params(*params: SchemeParams) -> None:
    first = params[0]
    for other in params[1:]:
        if other != first:
            raise DimensionMismatch(f"mismatched scheme parameters: {first} vs {other}")


def received_basis(ch: ChannelRealization, sw_plan: SwitchingPlan,
                   precoders: PrecoderSet) -> ReceivedBasis:
    params = precoders.params
    _same_params(ch.params, params)
    if sw_plan.sw.shape != (params.n, params.K):
        raise DimensionMismatch("switching plan does not match precoders")
    K = params.K
    labels = [(q, k, T) for q in range(1, K + 1)
              for k, T in enumerate(precoders.column_subsets[q], start=1)]
    V = np.hstack([precoders.matrix(q) for q in range(1, K + 1)])
    matrices = {}
    for p in range(1, K + 1):
        diag = np.column_stack([diagonal_channel(ch, sw_plan, p, q)
                                for q in range(1, K + 1)])
        # expand per-transmitter diagonals to one column per precoder column
        scale = np.repeat(diag, params.d, axis=1)
        M = scale * V if ch.exact else scale.astype(float) * V
        if ch.exact:
            M = M.astype(object)
        M.setflags(write=False)
        matrices[p] = M
    return ReceivedBasis(params=params, precoders=precoders, matrices=matrices,
                         labels=labels, exact=ch.exact)


def transmit(precoders: PrecoderSet, symbols: Sequence[Sequence],
             ch: ChannelRealization, sw_plan: SwitchingPlan,
             noise_power: float = 0.0, seed: int = 0) -> List[np.ndarray]:
    """Block observations ``y^[p] = sum_q H^[pq] V^[q] X^[q] + z^[p]``.

    Returns one length-n vector per receiver (index p-1). With exact
    channels, rational symbols and ``noise_power == 0`` the result is exact.
    """
    params = precoders.params
    K, d = params.K, params.d
    if len(symbols) != K:
        raise DimensionMismatch(f"expected symbol lists for {K} users, got {len(symbols)}")
    for q, xs in enumerate(symbols, start=1):
        if len(xs) != d:
            raise DimensionMismatch(f"user {q} needs {d} symbols, got {len(xs)}")
    if noise_power < 0:
        raise ValueError("noise_power must be nonnegative")
    rb = received_basis(ch, sw_plan, precoders)
    exact = ch.exact and noise_power == 0 and all(
        isinstance(x, (int, Fraction, np.integer)) for xs in symbols for x in xs)
    X = np.concatenate([np.asarray(list(xs), dtype=object if exact else float)
                        for xs in symbols])
    out = []
    for p in range(1, K + 1):
        M = rb.matrices[p]
        if exact:
            y = M.dot(X)
        else:
            y = np.asarray(M, dtype=float) @ X
            if noise_power > 0:
                noise = rng_for(seed, NOISE, p).normal(size=params.n)
                y = y + np.sqrt(noise_power) * noise
        out.append(y)
    return out
