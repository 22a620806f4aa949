"""Limits, differentiability and extrema by the radial criterion."""

from .expr import evaluate, parse, partial_at
from .radial import (RadialConfig, differential, differentiability_check, limit_along_path,
                     radial_derivative_profile, radial_limit)
from .report import Verdict

__version__ = "0.1.0"

__all__ = [
    "RadialConfig", "Verdict", "differential", "differentiability_check", "evaluate",
    "limit_along_path", "parse", "partial_at", "radial_derivative_profile", "radial_limit",
    "__version__",
]
