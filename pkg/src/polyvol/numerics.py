"""Dense linear-algebra kernels shared by the solver, estimator and oracles."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .exceptions import DomainError, SingularGram

# relative floor for triangular-factor diagonals
_DIAG_RTOL = 1e-13


@dataclass(frozen=True)
class GramLogDet:
    value: float
    condition_hint: float


@dataclass(frozen=True)
class NullBasis:
    """Orthonormal chart ``x = point + basis @ u`` of the affine space ``A x = b``."""

    basis: np.ndarray
    point: np.ndarray


def _r_diag_check(diag: np.ndarray, what: str) -> np.ndarray:
    mags = np.abs(diag)
    top = mags.max(initial=0.0)
    if top == 0.0 or mags.min() <= _DIAG_RTOL * top * max(1, diag.size):
        raise SingularGram(f"{what}: triangular factor is numerically singular")
    return mags


def gram_logdet(m_matrix) -> GramLogDet:
    """Return ``ln det(M M^T)`` using a QR factorisation of ``M^T``.

    ``M M^T = R^T R`` so the log-determinant is ``2 * sum(ln|R_ii|)``; the
    determinant itself is never formed.
    """
    mt = np.asarray(m_matrix, dtype=np.float64).T
    if mt.ndim != 2 or mt.shape[0] < mt.shape[1]:
        raise SingularGram(f"need an m x n matrix with m <= n, got {mt.T.shape}")
    r = linalg.qr(mt, mode="r", check_finite=False)[0]
    mags = _r_diag_check(np.diag(r), "gram_logdet")
    return GramLogDet(
        value=float(2.0 * np.sum(np.log(mags))),
        condition_hint=float(mags.max() / mags.min()),
    )


def nullspace(inst) -> NullBasis:
    """Orthonormal basis of ``ker A`` and the minimum-norm solution of ``A x = b``."""
    a = inst.a_matrix
    m, n = a.shape
    q, r = linalg.qr(a.T, mode="full", check_finite=False)
    _r_diag_check(np.diag(r[:m, :m]), "nullspace")
    q1 = q[:, :m]
    # A = R^T Q1^T, so x0 = Q1 R^{-T} b is the min-norm solution
    y = linalg.solve_triangular(r[:m, :m], inst.b_vector, trans="T", check_finite=False)
    return NullBasis(basis=np.ascontiguousarray(q[:, m:]), point=q1 @ y)


def kkt_solve(h_diag, a_matrix, r_dual, r_primal):
    """Solve ``[diag(h) A^T; A 0] (dx, dnu) = -(r_dual, r_primal)``.

    Block elimination through the Schur complement ``S = A diag(1/h) A^T``:
    ``S dnu = r_primal - A (r_dual / h)`` and ``dx = -(r_dual + A^T dnu) / h``.
    """
    h = np.asarray(h_diag, dtype=np.float64)
    a = np.asarray(a_matrix, dtype=np.float64)
    rd = np.asarray(r_dual, dtype=np.float64)
    rp = np.asarray(r_primal, dtype=np.float64)
    if np.any(h <= 0):
        raise DomainError("h_diag must be strictly positive")
    hinv = 1.0 / h
    schur = (a * hinv) @ a.T
    try:
        factor = linalg.cho_factor(schur, check_finite=False)
    except linalg.LinAlgError as exc:
        raise SingularGram("Schur complement is not positive definite") from exc
    _r_diag_check(np.diag(factor[0]) ** 2, "kkt_solve")
    dnu = linalg.cho_solve(factor, rp - a @ (hinv * rd), check_finite=False)
    dx = -(rd + a.T @ dnu) * hinv
    return dx, dnu


def log_gamma(t: float) -> float:
    """``ln Gamma(t)`` for ``t > 0``."""
    if not t > 0:
        raise DomainError(f"log_gamma needs t > 0, got {t}")
    return math.lgamma(t)


def seeded_rng(seed: int) -> np.random.Generator:
    """PCG64 stream; identical seeds give identical draws on every platform."""
    return np.random.Generator(np.random.PCG64(int(seed) % 2**64))


def child_rng(seed: int, index: int) -> np.random.Generator:
    """Independent stream for sub-task ``index`` derived from ``seed``."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed) % 2**64, index])))
