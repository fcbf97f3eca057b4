"""Normalized solutions of (-d^2/dx^2)^m u + lambda G'(u) = F'(u) with a
prescribed constraint mass: global branch tracing via time maps for m = 1 and
constrained variational minimization for general m."""

from .errors import (
    AllPointsDegenerate,
    BadBracket,
    DegenerateZero,
    DivergenceSuspected,
    DivergentNearZero,
    InversionFailure,
    ModelError,
    NoBracket,
    NoConvergence,
    NoCrossing,
    NoFiniteMZero,
    NormsolError,
    NotApplicableError,
    PreconditionFailed,
    SupportOverflow,
)
from .quadrature import (
    QuadConfig,
    QuadResult,
    RootConfig,
    bisect_root,
    find_first_root_above,
    integrate_singular,
)

__all__ = [
    "AllPointsDegenerate",
    "BadBracket",
    "DegenerateZero",
    "DivergenceSuspected",
    "DivergentNearZero",
    "InversionFailure",
    "ModelError",
    "NoBracket",
    "NoConvergence",
    "NoCrossing",
    "NoFiniteMZero",
    "NormsolError",
    "NotApplicableError",
    "PreconditionFailed",
    "SupportOverflow",
    "QuadConfig",
    "QuadResult",
    "RootConfig",
    "bisect_root",
    "find_first_root_above",
    "integrate_singular",
]
