"""Frozen reference data for the five-user scheme (r = 2, n = 14)."""

import numpy as np

S5_T = np.array([
    [0, 1, 1, 1, 1, 0, 0, 0, 0, 1, 1, 1, 1, 1],
    [1, 0, 1, 1, 1, 0, 1, 1, 1, 0, 0, 0, 1, 1],
    [1, 1, 0, 1, 1, 1, 0, 1, 1, 0, 1, 1, 0, 0],
    [1, 1, 1, 0, 1, 1, 1, 0, 1, 1, 0, 1, 0, 1],
    [1, 1, 1, 1, 0, 1, 1, 1, 0, 1, 1, 0, 1, 0],
])

# (subset, vector, {transmitter: 1-based column})
SHARED5 = [
    ((1, 2), "11000100000000", {1: 1, 2: 1}),
    ((1, 3), "10100010000000", {1: 2, 3: 1}),
    ((1, 4), "10010001000000", {1: 3, 4: 1}),
    ((1, 5), "10001000100000", {1: 4, 5: 1}),
    ((2, 3), "01100000010000", {2: 2, 3: 2}),
    ((2, 4), "01010000001000", {2: 3, 4: 2}),
    ((2, 5), "01001000000100", {2: 4, 5: 2}),
    ((3, 4), "00110000000010", {3: 3, 4: 3}),
    ((3, 5), "00101000000001", {3: 4, 5: 3}),
    ((4, 5), "00011000000000", {4: 4, 5: 4}),
]

SW5 = {
    1: "01111000011111",
    2: "10111011100011",
    3: "11011101101100",
    4: "11101110110101",
    5: "11110111011010",
}


def bits(s: str) -> np.ndarray:
    return np.array([int(c) for c in s])
