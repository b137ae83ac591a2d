"""Behavioural risk numerics: weighting kernels, orbits, curve geometry, risk operators and exit-time estimates."""

from __future__ import annotations

__version__ = "0.1.0"

from . import dirichlet, ergodic, geometry, kernel, pwf, riskops, rng
from .errors import ConfigError, DomainError, MTKRiskError, NumericError

__all__ = [
    "__version__",
    "dirichlet",
    "ergodic",
    "geometry",
    "kernel",
    "pwf",
    "riskops",
    "rng",
    "ConfigError",
    "DomainError",
    "MTKRiskError",
    "NumericError",
]
