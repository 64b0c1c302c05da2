"""Ground-truth volumes for checking the estimator at desk scale.

All volumes are ``(n - m)``-dimensional volumes of ``P`` inside its affine
span. Exact values come from a closed form (simplices) or from Lasserre's
facet recursion in an orthonormal chart; larger cases use rejection sampling.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import linalg
from scipy.optimize import linprog

from .center import CenterResult
from .exceptions import (
    DimensionTooLarge,
    DomainError,
    NumericalDegeneracy,
    ZeroAcceptance,
)
from .model import PolytopeInstance
from .numerics import NullBasis, child_rng, gram_logdet, log_gamma, nullspace

EXACT_DIM_CAP = 6
MC_DIM_CAP = 12
MC_MIN_SAMPLES = 10_000
MC_CHUNK = 1 << 16
# normals shorter than this after restriction to a face are treated as parallel
_PARALLEL_TOL = 1e-9
_DEDUP_TOL = 1e-9


class Method(str, enum.Enum):
    CLOSED_FORM_SIMPLEX = "ClosedFormSimplex"
    EXACT_RECURSIVE = "ExactRecursive"
    MONTE_CARLO = "MonteCarlo"
    CANFIELD_MCKAY = "CanfieldMcKayAsymptotic"


@dataclass(frozen=True)
class ReferenceVolume:
    ln_volume: float
    method: Method
    std_error_ln: Optional[float] = None
    samples: Optional[int] = None
    seed: Optional[int] = None

    def __post_init__(self):
        if (self.std_error_ln is not None) != (self.method is Method.MONTE_CARLO):
            raise ValueError("std_error_ln is set exactly for Monte Carlo volumes")

    def to_dict(self) -> dict:
        out = {"ln_volume": self.ln_volume, "method": self.method.value}
        if self.method is Method.MONTE_CARLO:
            out.update(std_error_ln=self.std_error_ln, samples=self.samples, seed=self.seed)
        return out


@dataclass(frozen=True)
class HPolytope:
    """Region ``{u : G u <= h}`` in ``d`` coordinates."""

    g_matrix: np.ndarray
    h_vector: np.ndarray

    @property
    def dim(self) -> int:
        return self.g_matrix.shape[1]


def to_hpolytope(inst: PolytopeInstance, nb: Optional[NullBasis] = None) -> HPolytope:
    """Pull ``x >= 0`` back through ``x = x0 + V u``: row j reads ``-V_j . u <= x0_j``."""
    if nb is None:
        nb = nullspace(inst)
    return HPolytope(g_matrix=-nb.basis, h_vector=nb.point.copy())


# -- exact recursion ---------------------------------------------------------


def _interval_length(c: np.ndarray, e: np.ndarray) -> float:
    up = e[c > 0] / c[c > 0]
    down = e[c < 0] / c[c < 0]
    if up.size == 0 or down.size == 0:
        raise NumericalDegeneracy("polytope is unbounded along a recursion edge")
    return max(0.0, float(up.min() - down.max()))


class _Lasserre:
    """Facet recursion ``vol_k(F) = (1/k) sum_j dist_j vol_{k-1}(F cap H_j)``.

    ``dist_j`` is the signed distance from the chart origin to hyperplane j,
    so any origin works. Faces are memoised on the set of hyperplanes that
    cut them out; that key determines the face regardless of visiting order.
    """

    def __init__(self, g: np.ndarray, h: np.ndarray):
        norms = np.linalg.norm(g, axis=1)
        if np.any(norms == 0):
            raise NumericalDegeneracy("zero inequality normal")
        self.g = g / norms[:, None]
        self.h = h / norms
        self.scale = 1.0 + float(np.max(np.abs(self.h)))
        self.memo: dict = {}

    def volume(self) -> float:
        d = self.g.shape[1]
        return self._face(frozenset(), np.zeros(d), np.eye(d))

    def _restrict(self, tight, point, chart):
        """Constraints of the face in chart coordinates, or None if it is empty."""
        idx = np.array([j for j in range(self.g.shape[0]) if j not in tight], dtype=int)
        c = self.g[idx] @ chart
        e = self.h[idx] - self.g[idx] @ point
        cn = np.linalg.norm(c, axis=1)
        parallel = cn < _PARALLEL_TOL
        if np.any(e[parallel] < -_PARALLEL_TOL * self.scale):
            return None
        keep = ~parallel
        idx, c, e, cn = idx[keep], c[keep], e[keep], cn[keep]
        c = c / cn[:, None]
        e = e / cn
        # coincident hyperplanes would count the same facet twice
        uniq = []
        for r in range(len(idx)):
            if not any(
                np.max(np.abs(c[r] - c[s])) < _DEDUP_TOL
                and abs(e[r] - e[s]) < _DEDUP_TOL * self.scale
                for s in uniq
            ):
                uniq.append(r)
        return idx[uniq], c[uniq], e[uniq]

    def _face(self, tight: frozenset, point: np.ndarray, chart: np.ndarray) -> float:
        if tight in self.memo:
            return self.memo[tight]
        restricted = self._restrict(tight, point, chart)
        if restricted is None:
            self.memo[tight] = 0.0
            return 0.0
        idx, c, e = restricted
        k = chart.shape[1]
        if k == 1:
            vol = _interval_length(c[:, 0], e) if len(idx) else math.inf
        else:
            vol = 0.0
            for j, cj, ej in zip(idx, c, e):
                if abs(ej) < 1e-300:
                    continue
                perp = linalg.null_space(cj[None, :])
                sub = self._face(tight | {int(j)}, point + chart @ (cj * ej), chart @ perp)
                vol += ej * sub
            vol /= k
        if not math.isfinite(vol):
            raise NumericalDegeneracy("polytope is unbounded")
        self.memo[tight] = vol
        return vol


def volume_exact(hp: HPolytope, dim_cap: int = EXACT_DIM_CAP) -> ReferenceVolume:
    if hp.dim > dim_cap:
        raise DimensionTooLarge(f"exact volume is capped at dimension {dim_cap}, got {hp.dim}")
    if hp.dim < 1:
        raise DomainError("H-polytope must have dimension at least 1")
    vol = _Lasserre(np.asarray(hp.g_matrix, float), np.asarray(hp.h_vector, float)).volume()
    if not vol > 0:
        raise NumericalDegeneracy(f"recursion returned non-positive volume {vol:.3e}")
    return ReferenceVolume(ln_volume=math.log(vol), method=Method.EXACT_RECURSIVE)


# -- Monte Carlo -------------------------------------------------------------


def bounding_box(hp: HPolytope) -> tuple[np.ndarray, np.ndarray]:
    """Coordinate extremes of ``{G u <= h}`` from 2d linear programs."""
    d = hp.dim
    lo, hi = np.empty(d), np.empty(d)
    free = [(None, None)] * d
    for i in range(d):
        for sign, out in ((1.0, lo), (-1.0, hi)):
            cost = np.zeros(d)
            cost[i] = sign
            res = linprog(cost, A_ub=hp.g_matrix, b_ub=hp.h_vector, bounds=free, method="highs")
            if res.status == 3:
                raise NumericalDegeneracy(f"coordinate {i} is unbounded")
            if res.status != 0:
                raise NumericalDegeneracy(f"bounding LP failed: {res.message}")
            out[i] = sign * res.fun
    return lo, hi


def _count_chunk(hp, lo, hi, size, seed, index, tol):
    rng = child_rng(seed, index)
    u = lo + (hi - lo) * rng.random((size, hp.dim))
    inside = np.all(u @ hp.g_matrix.T <= hp.h_vector + tol, axis=1)
    return int(np.count_nonzero(inside))


def volume_mc(hp: HPolytope, samples: int, seed: int, threads: int = 1) -> ReferenceVolume:
    """Rejection sampling from the coordinate bounding box.

    Samples are drawn in fixed-size chunks, each from its own stream derived
    from ``(seed, chunk index)``, so the result does not depend on ``threads``.
    """
    if samples < MC_MIN_SAMPLES:
        raise DomainError(f"need at least {MC_MIN_SAMPLES} samples")
    if hp.dim > MC_DIM_CAP:
        raise DimensionTooLarge(f"Monte Carlo is capped at dimension {MC_DIM_CAP}")
    lo, hi = bounding_box(hp)
    widths = hi - lo
    if np.any(widths <= 0):
        raise ZeroAcceptance("bounding box is degenerate")
    sizes = [MC_CHUNK] * (samples // MC_CHUNK)
    if samples % MC_CHUNK:
        sizes.append(samples % MC_CHUNK)
    tol = 1e-12 * (1.0 + float(np.max(np.abs(hp.h_vector))))
    jobs = [(hp, lo, hi, size, seed, i, tol) for i, size in enumerate(sizes)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            counts = list(pool.map(lambda job: _count_chunk(*job), jobs))
    else:
        counts = [_count_chunk(*job) for job in jobs]
    hits = sum(counts)
    if hits == 0:
        raise ZeroAcceptance(f"no sample out of {samples} landed inside the polytope")
    p = hits / samples
    return ReferenceVolume(
        ln_volume=float(np.sum(np.log(widths))) + math.log(p),
        method=Method.MONTE_CARLO,
        std_error_ln=math.sqrt((1.0 - p) / hits),
        samples=samples,
        seed=seed,
    )


# -- closed forms and identities ---------------------------------------------


def simplex_ln_volume(alphas, beta: float) -> float:
    """``ln vol`` of ``{x >= 0 : alpha . x = beta}``: ``beta^(n-1) |alpha| / ((n-1)! prod alpha)``."""
    alphas = np.asarray(alphas, dtype=float)
    n = alphas.size
    return float(
        (n - 1) * math.log(beta)
        - log_gamma(n)
        + 0.5 * math.log(float(np.dot(alphas, alphas)))
        - np.sum(np.log(alphas))
    )


def simplex_reference(inst: PolytopeInstance) -> ReferenceVolume:
    a = inst.a_matrix
    if inst.m != 1 or np.any(a <= 0) or not inst.b_vector[0] > 0:
        raise DomainError("closed form applies to a single positive equation")
    return ReferenceVolume(simplex_ln_volume(a[0], inst.b_vector[0]), Method.CLOSED_FORM_SIMPLEX)


def ln_density_m1(n: int) -> float:
    """``ln`` of the gamma density ``t^(n-1) e^(-t) / (n-1)!`` at ``t = n``."""
    return (n - 1) * math.log(n) - n - log_gamma(n)


def density_oracle_m1(inst: PolytopeInstance, center: CenterResult) -> float:
    """Density of ``Y = sum X_j`` (i.i.d. standard exponentials) at ``b = n``.

    Only defined for a single equation normalised to right-hand side ``n``;
    rescale other right-hand sides first.
    """
    n = inst.n
    if inst.m != 1:
        raise DomainError("density oracle needs exactly one equation")
    if n < 2:
        raise DomainError("density oracle needs n >= 2")
    if abs(inst.b_vector[0] - n) > 1e-9 * n:
        raise DomainError(f"right-hand side must equal n={n}, got {inst.b_vector[0]}")
    if np.any(np.asarray(center.z) <= 0):
        raise DomainError("center must be strictly positive")
    return math.exp(ln_density_m1(n))


def ln_density_from_volume(inst: PolytopeInstance, center: CenterResult, ln_volume: float) -> float:
    """``ln(vol P / (e^f(z) sqrt(det A A^T)))``."""
    return ln_volume - center.f_value - 0.5 * gram_logdet(inst.a_matrix).value


def canfield_mckay_lnvol(k: int) -> float:
    """Main term of the Canfield-McKay asymptotic for the ``k x k`` Birkhoff polytope."""
    if k < 2:
        raise DomainError("k must be at least 2")
    return -(k - 0.5) * math.log(2.0 * math.pi) - (k - 1) ** 2 * math.log(k) + 1.0 / 3.0 + k * k


def reference_volume(
    inst: PolytopeInstance,
    method: str = "exact",
    samples: int = 1_000_000,
    seed: int = 0,
    threads: int = 1,
) -> ReferenceVolume:
    """Dispatch on ``method`` in ``{"exact", "mc", "simplex"}``."""
    if method == "simplex":
        return simplex_reference(inst)
    hp = to_hpolytope(inst)
    if method == "exact":
        return volume_exact(hp)
    if method == "mc":
        return volume_mc(hp, samples, seed, threads)
    raise DomainError(f"unknown reference method {method!r}")
