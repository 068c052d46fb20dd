"""Counter-based seed splitting.

All randomness descends from one root seed. A stream is addressed by a
tuple of small integers (stream kind, receiver, trial, ...), so the value a
worker draws never depends on scheduling order.
"""

from __future__ import annotations

import numpy as np

CHANNEL = 1
NOISE = 2
SYMBOLS = 3
SIMULATION = 4


def derive_seed(root: int, *key: int) -> int:
    ss = np.random.SeedSequence(int(root), spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def rng_for(root: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(root), spawn_key=tuple(key)))
