"""Verdicts and JSON conversion of report objects."""

from __future__ import annotations

import dataclasses
import enum
import math

import numpy as np

from .expr import Expr, Quaternion, to_text


class Verdict(str, enum.Enum):
    EXISTS = "EXISTS"
    NOT_EXISTS = "NOT_EXISTS"
    UNDEFINED = "UNDEFINED"
    DIFFERENTIABLE = "DIFFERENTIABLE"
    NOT_DIFFERENTIABLE = "NOT_DIFFERENTIABLE"
    ANALYTIC = "ANALYTIC"
    NOT_ANALYTIC = "NOT_ANALYTIC"
    CONVERGED = "CONVERGED"
    NOT_CONVERGED = "NOT_CONVERGED"
    UNIFORM = "UNIFORM"
    NOT_UNIFORM = "NOT_UNIFORM"


def _float(x: float):
    if math.isnan(x):
        return None
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def to_jsonable(obj):
    """Plain JSON-compatible structure for reports.

    nan becomes null, infinities the strings "inf"/"-inf", complex numbers
    ``{"re": .., "im": ..}`` and quaternions a 4-list.
    """
    if obj is None or isinstance(obj, (bool, str)):
        return obj.value if isinstance(obj, enum.Enum) else obj
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, (int, np.integer)) and not isinstance(obj, bool):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _float(float(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": _float(obj.real), "im": _float(obj.imag)}
    if isinstance(obj, Quaternion):
        return [_float(v) for v in obj.as_tuple()]
    if isinstance(obj, Expr):
        return to_text(obj)
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()] if obj.dtype != object else \
            [to_jsonable(v) for v in obj]
    if dataclasses.is_dataclass(obj):
        out = {}
        for f in dataclasses.fields(obj):
            if f.metadata.get("json", True):
                out[f.name] = to_jsonable(getattr(obj, f.name))
        return out
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    raise TypeError(f"cannot serialise {type(obj).__name__}")
