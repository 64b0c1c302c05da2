"""Analytic-center volume estimate ``E(A, b)`` and its certified sandwich bounds.

For the analytic center ``z`` of ``P``, with ``B = A diag(z)``::

    E(A, b) = exp(f(z)) * sqrt(det A A^T) / sqrt(det B B^T)

and, with ``m`` the number of equations,

    LB(m) * E  <=  vol P  <=  alpha0**(-m/2) * E,
    LB(m) = 2 Gamma((m+2)/2) / (pi**(m/2) e**((m+2)/2) (m+2)**(m/2)).

Everything is returned as natural logarithms.
"""

from __future__ import annotations

import functools
import math
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator

from .center import CenterResult, SolverConfig, analytic_center
from .exceptions import DomainError
from .model import PolytopeInstance, check_instance, validate
from .numerics import gram_logdet, log_gamma

LN_2PI = math.log(2.0 * math.pi)
# ln of the largest value emitted in linear scale
LINEAR_SCALE_LIMIT = 700.0


def ln_sqrt_alpha_f(alpha: float) -> float:
    """``ln(sqrt(alpha) * F(alpha))`` via the gamma-ratio closed form.

    ``sqrt(alpha) F(alpha) = (1/2pi) int (1 + s^2)^(-q) ds`` with ``q = 1/(2 alpha)``,
    which equals ``Gamma(q - 1/2) / (2 sqrt(pi) Gamma(q))`` for ``q > 1/2``.
    """
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    q = 0.5 / alpha
    return log_gamma(q - 0.5) - log_gamma(q) - math.log(2.0 * math.sqrt(math.pi))


def entropy_integral(alpha: float) -> float:
    """``F(alpha) = (1/2pi) int (1 + alpha t^2)^(-1/(2 alpha)) dt`` in closed form."""
    return math.exp(ln_sqrt_alpha_f(alpha)) / math.sqrt(alpha)


def compute_alpha0(tol: float = 1e-12) -> float:
    """Root of ``sqrt(alpha) F(alpha) = 1`` on ``(0, 1)`` by bisection."""
    if not 0.0 < tol < 1e-4:
        raise DomainError("tol must lie in (0, 1e-4)")
    lo, hi = 1e-6, 1.0 - 1e-6
    # sqrt(alpha) F(alpha) increases from 0 to +inf on (0, 1)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if ln_sqrt_alpha_f(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@functools.lru_cache(maxsize=None)
def alpha0() -> float:
    return compute_alpha0(1e-12)


def ln_lower_constant(m: int) -> float:
    """``ln LB(m)``; a lower bound on ``ln vol P - ln E``."""
    if m < 1:
        raise DomainError("m must be at least 1")
    return (
        math.log(2.0)
        + log_gamma((m + 2) / 2)
        - 0.5 * m * math.log(math.pi)
        - (m + 2) / 2
        - 0.5 * m * math.log(m + 2)
    )


@dataclass(frozen=True)
class BoundConstants:
    alpha0: float
    ln_upper_factor_per_m: float

    @classmethod
    def default(cls) -> "BoundConstants":
        a0 = alpha0()
        return cls(alpha0=a0, ln_upper_factor_per_m=-0.5 * math.log(a0))

    def ln_lower_part2(self, m: int) -> float:
        return ln_lower_constant(m)


@dataclass(frozen=True)
class VolumeEstimate:
    ln_estimate: float
    ln_gaussian: float
    ln_upper: float
    ln_lower: float
    ln_lower_asymptotic_reference: float
    m: int
    n: int

    @property
    def estimate(self) -> Optional[float]:
        """``E(A, b)`` in linear scale, or ``None`` when it would overflow."""
        if self.ln_estimate >= LINEAR_SCALE_LIMIT:
            return None
        return math.exp(self.ln_estimate)

    def contains(self, ln_volume: float, slack: float = 0.0) -> bool:
        return self.ln_lower - slack <= ln_volume <= self.ln_upper + slack

    def to_dict(self) -> dict:
        return asdict(self)


def ln_estimate(inst: PolytopeInstance, center: CenterResult) -> float:
    """``ln E(A, b) = n + sum(ln z) + (ln det AA^T - ln det BB^T) / 2``."""
    z = np.asarray(center.z, dtype=float)
    a = inst.a_matrix
    b_scaled = a * z
    return float(
        inst.n
        + np.sum(np.log(z))
        + 0.5 * gram_logdet(a).value
        - 0.5 * gram_logdet(b_scaled).value
    )


def gaussian_approx(ln_est: float, m: int) -> float:
    """Maximum-entropy Gaussian value ``E / (2 pi)^(m/2)`` in log form."""
    if m < 1:
        raise DomainError("m must be at least 1")
    return ln_est - 0.5 * m * LN_2PI


def bounds(ln_est: float, m: int) -> tuple[float, float, float]:
    """Return ``(ln_upper, ln_lower, ln_lower_asymptotic_reference)``.

    The third value is only the ``(2 pi e)^(-m/2)`` leading term; its
    sub-exponential prefactor is not explicit, so it certifies nothing.
    """
    if m < 1:
        raise DomainError("m must be at least 1")
    consts = BoundConstants.default()
    upper = ln_est + m * consts.ln_upper_factor_per_m
    lower = ln_est + ln_lower_constant(m)
    reference = ln_est - 0.5 * m * (LN_2PI + 1.0)
    return upper, lower, reference


def package_estimate(inst: PolytopeInstance, center: CenterResult) -> VolumeEstimate:
    est = ln_estimate(inst, center)
    upper, lower, ref = bounds(est, inst.m)
    return VolumeEstimate(
        ln_estimate=est,
        ln_gaussian=gaussian_approx(est, inst.m),
        ln_upper=upper,
        ln_lower=lower,
        ln_lower_asymptotic_reference=ref,
        m=inst.m,
        n=inst.n,
    )


def estimate_full(
    inst: PolytopeInstance, cfg: Optional[SolverConfig] = None
) -> tuple[VolumeEstimate, CenterResult]:
    """Validate, solve for the center and package the estimate with its bounds."""
    check_instance(inst)
    center = analytic_center(inst, cfg)
    return package_estimate(inst, center), center


class AnalyticCenterVolume(BaseEstimator):
    """Estimator-style front end: ``fit(A, b)`` then read the fitted attributes.

    Parameters mirror :class:`~polyvol.center.SolverConfig`, so the object
    clones and grid-searches like any scikit-learn estimator.

    Attributes
    ----------
    center_ : CenterResult
    estimate_ : VolumeEstimate
    ln_volume_estimate_ : float
    ln_bounds_ : tuple of float
        Certified ``(lower, upper)`` bounds on ``ln vol P``.
    n_features_in_ : int
        Number of variables ``n``.
    """

    def __init__(
        self,
        feas_tol=1e-10,
        stat_tol=1e-9,
        max_iterations=200,
        divergence_bound=1e12,
        line_search_beta=0.5,
        line_search_sigma=0.01,
        rank_tol=None,
    ):
        self.feas_tol = feas_tol
        self.stat_tol = stat_tol
        self.max_iterations = max_iterations
        self.divergence_bound = divergence_bound
        self.line_search_beta = line_search_beta
        self.line_search_sigma = line_search_sigma
        self.rank_tol = rank_tol

    def _solver_config(self) -> SolverConfig:
        return SolverConfig(
            feas_tol=self.feas_tol,
            stat_tol=self.stat_tol,
            max_iterations=self.max_iterations,
            divergence_bound=self.divergence_bound,
            line_search_beta=self.line_search_beta,
            line_search_sigma=self.line_search_sigma,
        )

    def fit(self, A, b=None):
        inst = check_instance(A, b, rank_tol=self.rank_tol)
        self.validation_ = validate(inst, self.rank_tol)
        self.center_ = analytic_center(inst, self._solver_config())
        self.estimate_ = package_estimate(inst, self.center_)
        self.ln_volume_estimate_ = self.estimate_.ln_estimate
        self.ln_bounds_ = (self.estimate_.ln_lower, self.estimate_.ln_upper)
        self.n_features_in_ = inst.n
        return self
