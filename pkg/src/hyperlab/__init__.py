"""Finite-horizon numerical checks for hypercyclicity of weighted shifts
and parabolic composition operators."""

from .errors import (ConditioningError, HyperlabError, InputError, PoleError,
                     ProductOverflowError, ReflexivityError)
from .report import Report, Verdict

__all__ = [
    "ConditioningError",
    "HyperlabError",
    "InputError",
    "PoleError",
    "ProductOverflowError",
    "ReflexivityError",
    "Report",
    "Verdict",
]
__version__ = "0.1.0"
