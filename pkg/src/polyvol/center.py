"""Analytic center of ``{x >= 0 : A x = b}``: the maximiser of ``n + sum(ln x_j)``."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .exceptions import MaxIterations, NoInterior, PossiblyUnbounded
from .model import PolytopeInstance
from .numerics import kkt_solve

logger = logging.getLogger(__name__)

BOUNDARY_FRACTION = 0.99
_MIN_STEP = 1e-14
# iterations over which the infeasible phase must cut the primal residual by 1%
STALL_WINDOW = 30
# below this squared Newton decrement the barrier is in its quadratic region and
# full steps are taken; an Armijo test there only measures rounding noise
FULL_STEP_DECREMENT = 0.01


@dataclass(frozen=True)
class SolverConfig:
    """Newton solver settings.

    ``feas_tol`` bounds the relative primal residual ``||Az - b|| / (1 + ||b||)``;
    ``stat_tol`` bounds ``max_j |z_j (A^T lambda)_j - 1|``.
    """

    feas_tol: float = 1e-10
    stat_tol: float = 1e-9
    max_iterations: int = 200
    divergence_bound: float = 1e12
    line_search_beta: float = 0.5
    line_search_sigma: float = 0.01

    def __post_init__(self):
        for name in ("feas_tol", "stat_tol", "divergence_bound"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        for name in ("line_search_beta", "line_search_sigma"):
            if not 0 < getattr(self, name) < 1:
                raise ValueError(f"{name} must lie in (0, 1)")


@dataclass(frozen=True)
class CenterResult:
    z: np.ndarray
    f_value: float
    dual: np.ndarray
    primal_residual: float
    stationarity_residual: float
    iterations: int


def objective(x) -> float:
    """``f(x) = n + sum(ln x_j)``; ``-inf`` outside the open orthant."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        return -math.inf
    return float(x.size + np.sum(np.log(x)))


def _residuals(a, b, x, lam, bscale):
    primal = float(np.linalg.norm(a @ x - b)) / bscale
    stat = float(np.max(np.abs(x * (a.T @ lam) - 1.0)))
    return primal, stat


def _max_step(x, dx) -> float:
    neg = dx < 0
    if not np.any(neg):
        return 1.0
    return min(1.0, BOUNDARY_FRACTION * float(np.min(-x[neg] / dx[neg])))


def analytic_center(inst: PolytopeInstance, cfg: SolverConfig | None = None) -> CenterResult:
    """Infeasible-start damped Newton from ``x = 1``.

    While ``A x != b`` the step is accepted on decrease of the full KKT
    residual norm; once primal feasible it is the plain equality-constrained
    Newton method with an Armijo test on ``-f``. Steps never go past 99% of the
    distance to the orthant boundary.
    """
    cfg = cfg or SolverConfig()
    a, b = inst.a_matrix, inst.b_vector
    m, n = a.shape
    bscale = 1.0 + float(np.linalg.norm(b))
    beta, sigma = cfg.line_search_beta, cfg.line_search_sigma
    f_cap = n * math.log(cfg.divergence_bound)

    x = np.ones(n)
    nu = np.zeros(m)
    history = []
    for it in range(cfg.max_iterations):
        rp = a @ x - b
        primal = float(np.linalg.norm(rp)) / bscale
        feasible = primal <= cfg.feas_tol
        rd = a.T @ nu - 1.0 / x
        dx, dnu = kkt_solve(1.0 / x**2, a, rd, rp)
        lam = nu + dnu
        stat = float(np.max(np.abs(x * (a.T @ lam) - 1.0)))
        logger.debug("iter %d primal %.3e stat %.3e", it, primal, stat)
        if feasible and stat <= cfg.stat_tol:
            return CenterResult(
                z=x,
                f_value=objective(x),
                dual=lam,
                primal_residual=primal,
                stationarity_residual=stat,
                iterations=it,
            )

        t = _max_step(x, dx)
        if feasible:
            # slope is minus the squared Newton decrement
            slope = float(np.dot(-1.0 / x, dx))
            if -slope > FULL_STEP_DECREMENT:
                phi = -np.sum(np.log(x))
                while -np.sum(np.log(x + t * dx)) > phi + sigma * t * slope:
                    t *= beta
                    if t < _MIN_STEP:
                        raise MaxIterations(f"line search stalled at iteration {it}")
            x = x + t * dx
            nu = lam
        else:
            rnorm = math.hypot(np.linalg.norm(rd), np.linalg.norm(rp))
            while True:
                xt, nut = x + t * dx, nu + t * dnu
                rt = math.hypot(np.linalg.norm(a.T @ nut - 1.0 / xt), np.linalg.norm(a @ xt - b))
                if rt <= (1.0 - sigma * t) * rnorm:
                    break
                t *= beta
                if t < _MIN_STEP:
                    raise NoInterior(
                        f"primal residual stalled at {primal:.3e}; "
                        "the polytope looks empty or has no relative interior"
                    )
            x, nu = xt, nut

        if np.max(x) > cfg.divergence_bound or objective(x) > f_cap:
            raise PossiblyUnbounded(
                f"iterates diverge (max entry {np.max(x):.3e}, f = {objective(x):.4g}); "
                "the polytope is likely unbounded"
            )
        if not feasible:
            history.append(primal)
            if len(history) > STALL_WINDOW and history[-1] > 0.99 * history[-1 - STALL_WINDOW]:
                raise NoInterior(
                    f"primal residual stalled at {primal:.3e}; "
                    "the polytope looks empty or has no relative interior"
                )

    primal = float(np.linalg.norm(a @ x - b)) / bscale
    if primal > cfg.feas_tol:
        raise NoInterior(
            f"primal residual {primal:.3e} still above {cfg.feas_tol:.3e} "
            f"after {cfg.max_iterations} iterations"
        )
    raise MaxIterations(f"no convergence in {cfg.max_iterations} iterations")


def center_certificate(inst: PolytopeInstance, res: CenterResult) -> tuple[float, float]:
    """Recompute ``(primal_residual, stationarity_residual)`` from ``z`` alone.

    The multipliers are re-derived by least squares on ``A^T lambda = 1/z``.
    """
    a, b = inst.a_matrix, inst.b_vector
    z = np.asarray(res.z, dtype=float)
    lam = np.linalg.lstsq(a.T, 1.0 / z, rcond=None)[0]
    return _residuals(a, b, z, lam, 1.0 + float(np.linalg.norm(b)))
