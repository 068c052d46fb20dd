"""Canonical JSON documents (schema version 1).

Matrices are row-major nested lists of integers, users and slots are
1-based, and dumps use sorted keys with fixed separators so two identical
objects always serialize to identical bytes.
"""

from __future__ import annotations

import hashlib
import json
from typing import Any

import numpy as np

from .channel import ChannelRealization, channel_from_dict
from .construct import (BasisMatrix, Construction, PrecoderSet, SchemeParams,
                        SharedVector, SwitchingPlan)
from .errors import ConstructionError

SCHEMA = 1


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), default=_default) + "\n"


def _default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def digest(text: str | bytes) -> str:
    if isinstance(text, str):
        text = text.encode()
    return hashlib.sha256(text).hexdigest()


def _matrix(a: np.ndarray) -> list:
    return [[int(x) for x in row] for row in np.asarray(a)]


def construction_to_dict(cons: Construction) -> dict:
    p = cons.params
    pre = cons.precoders
    return {
        "schema": SCHEMA,
        "kind": "construction",
        "params": p.to_dict(),
        "S": _matrix(cons.basis.entries),
        "B": _matrix(cons.basis.b_block),
        "b_supports": [list(s) for s in cons.basis.b_supports],
        "idle_rows": cons.basis.idle_rows,
        "precoders": {str(q): _matrix(pre.matrix(q)) for q in range(1, p.K + 1)},
        "precoder_subsets": {str(q): [list(T) for T in pre.column_subsets[q]]
                             for q in range(1, p.K + 1)},
        "shared_index": [
            {"subset": list(T), "vector": [int(x) for x in sv.vector],
             "columns": {str(q): k for q, k in sorted(sv.columns.items())}}
            for T, sv in pre.shared_index.items()
        ],
        "switching": _matrix(cons.switching.sw),
    }


def _frozen(a) -> np.ndarray:
    arr = np.asarray(a, dtype=np.int64)
    arr.setflags(write=False)
    return arr


def construction_from_dict(data: dict) -> Construction:
    """Rebuild a bundle as stored, without recomputing it from (K, r)."""
    if data.get("schema") != SCHEMA or data.get("kind") != "construction":
        raise ConstructionError("not a schema-1 construction bundle")
    params = SchemeParams.from_dict(data["params"])
    K = params.K
    S = _frozen(data["S"])
    basis = BasisMatrix(entries=S, b_supports=[tuple(s) for s in data["b_supports"]],
                        a_block_count=params.r - 1, idle_rows=int(data.get("idle_rows", 0)))
    matrices, subsets = {}, {}
    for q in range(1, K + 1):
        matrices[q] = _frozen(data["precoders"][str(q)]).reshape(params.n, params.d)
        subsets[q] = [tuple(T) for T in data["precoder_subsets"][str(q)]]
    shared = {}
    for entry in data["shared_index"]:
        T = tuple(entry["subset"])
        shared[T] = SharedVector(subset=T, vector=_frozen(entry["vector"]),
                                 columns={int(q): int(k) for q, k in entry["columns"].items()})
    pre = PrecoderSet(params=params, matrices=matrices, column_subsets=subsets,
                      shared_index=shared)
    sw = SwitchingPlan(sw=_frozen(data["switching"]), r=params.r)
    for name, shape, arr in (("S", (params.n, K), S), ("switching", (params.n, K), sw.sw)):
        if arr.shape != shape:
            raise ConstructionError(f"{name} has shape {arr.shape}, expected {shape}")
    return Construction(params=params, basis=basis, precoders=pre, switching=sw)


def channel_to_dict(ch: ChannelRealization) -> dict:
    out = {"schema": SCHEMA, "kind": "channel"}
    out.update(ch.to_dict())
    return out


def channel_from_json(data: dict) -> ChannelRealization:
    return channel_from_dict(data)
