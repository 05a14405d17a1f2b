"""JSON helpers for extended reals.

All JSON surfaces of the toolkit encode +infinity as the string "inf"
(bare Infinity is not valid JSON).  NaN has no encoding and is rejected.
"""

from __future__ import annotations

import math
from typing import Any


def encode_extended(value: float) -> Any:
    if math.isnan(value):
        raise ValueError("NaN has no JSON encoding")
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return value


def decode_extended(value: Any) -> float:
    if isinstance(value, str):
        if value == "inf":
            return math.inf
        if value == "-inf":
            return -math.inf
        raise ValueError("need a number or 'inf', got %r" % (value,))
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValueError("need a number or 'inf', got %r" % (value,))
    value = float(value)
    if math.isnan(value):
        raise ValueError("NaN is not accepted")
    return value


def to_jsonable(obj: Any) -> Any:
    """Recursively convert dicts/lists/floats, mapping infinities to strings."""
    if isinstance(obj, dict):
        return {k: to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, float):
        return encode_extended(obj)
    return obj
