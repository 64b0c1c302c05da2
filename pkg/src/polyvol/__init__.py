"""Deterministic analytic-center volume estimates for ``{x >= 0 : A x = b}``."""

from .center import CenterResult, SolverConfig, analytic_center, center_certificate
from .estimator import (
    AnalyticCenterVolume,
    BoundConstants,
    VolumeEstimate,
    alpha0,
    bounds,
    compute_alpha0,
    estimate_full,
    gaussian_approx,
    ln_estimate,
)
from .exceptions import PolyvolError
from .model import PolytopeInstance, ValidationReport, check_instance, dumps_instance, load_instance, validate

__version__ = "0.1.0"

__all__ = [
    "AnalyticCenterVolume",
    "BoundConstants",
    "CenterResult",
    "PolytopeInstance",
    "PolyvolError",
    "SolverConfig",
    "ValidationReport",
    "VolumeEstimate",
    "alpha0",
    "analytic_center",
    "bounds",
    "center_certificate",
    "check_instance",
    "compute_alpha0",
    "dumps_instance",
    "estimate_full",
    "gaussian_approx",
    "ln_estimate",
    "load_instance",
    "validate",
]
