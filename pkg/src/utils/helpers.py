"""
Utility helper functions for the OUQ-RBDO toolkit
"""

import dataclasses
import hashlib
import json
import math
from typing import Any

import numpy as np


def derive_seed(master: int, *keys: int) -> int:
    """
    Derive an independent 64-bit seed from a master seed and an integer path

    Args:
        master: Master seed
        keys: Path below the master, e.g. (generation, member)

    Returns:
        Seed that depends only on master and keys
    """
    sequence = np.random.SeedSequence(entropy=int(master), spawn_key=tuple(int(k) for k in keys))
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


def to_jsonable(obj: Any) -> Any:
    """Convert dataclasses, tuples and numpy values into plain JSON values"""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        value = float(obj)
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    return obj


def stable_hash(payload: Any) -> str:
    """SHA-256 of the canonical JSON rendering of a payload"""
    text = json.dumps(to_jsonable(payload), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def quantize(values, quantum: float) -> tuple:
    """Round every coordinate to a multiple of quantum"""
    return tuple(round(float(v) / quantum) * quantum for v in values)
