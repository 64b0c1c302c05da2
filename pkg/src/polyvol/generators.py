"""Instance families: simplices, 2-way and 3-way planar transportation polytopes, random."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .exceptions import DomainError, RankDeficient, UnbalancedMargins
from .model import PolytopeInstance, validate
from .numerics import seeded_rng

BALANCE_RTOL = 1e-12


@dataclass(frozen=True)
class FamilyTag:
    family: str
    parameters: dict = field(default_factory=dict)

    FAMILIES = ("simplex", "transport", "planar3", "random")

    def __post_init__(self):
        if self.family not in self.FAMILIES:
            raise DomainError(f"unknown family {self.family!r}")

    def label(self) -> str:
        def fmt(v):
            if isinstance(v, (list, tuple, np.ndarray)):
                return ",".join(f"{float(x):.17g}" for x in v)
            return str(v)

        params = ";".join(f"{k}={fmt(v)}" for k, v in self.parameters.items())
        return f"{self.family}({params})"


@dataclass(frozen=True)
class Margins2Way:
    row_sums: tuple
    col_sums: tuple

    def __post_init__(self):
        r = tuple(float(v) for v in self.row_sums)
        c = tuple(float(v) for v in self.col_sums)
        if not r or not c:
            raise DomainError("margins must be non-empty")
        if min(r) <= 0 or min(c) <= 0:
            raise DomainError("margins must be positive")
        total_r, total_c = sum(r), sum(c)
        if abs(total_r - total_c) > BALANCE_RTOL * max(total_r, total_c):
            raise UnbalancedMargins(f"row sums total {total_r:g} but column sums total {total_c:g}")
        object.__setattr__(self, "row_sums", r)
        object.__setattr__(self, "col_sums", c)


def gen_simplex(alphas: Sequence[float], beta: float) -> PolytopeInstance:
    alphas = np.asarray(alphas, dtype=float)
    if alphas.ndim != 1 or alphas.size < 2:
        raise DomainError("need at least two coefficients")
    if np.any(alphas <= 0) or not beta > 0:
        raise DomainError("simplex needs all alphas > 0 and beta > 0")
    tag = FamilyTag("simplex", {"alphas": alphas, "beta": beta})
    return PolytopeInstance(alphas[None, :], [beta], tag.label())


def transport_matrix(k: int, l: int) -> np.ndarray:
    """Row sums then the first ``l - 1`` column sums; variable ``(i, j)`` is ``i*l + j``."""
    a = np.zeros((k + l - 1, k * l))
    for i in range(k):
        a[i, i * l:(i + 1) * l] = 1.0
    for j in range(l - 1):
        a[k + j, j::l] = 1.0
    return a


def gen_transport(margins: Margins2Way, label: str | None = None) -> PolytopeInstance:
    r, c = margins.row_sums, margins.col_sums
    k, l = len(r), len(c)
    if k < 2 or l < 2:
        raise DomainError("transportation polytopes need k, l >= 2")
    b = np.concatenate([r, c[:-1]])
    if label is None:
        label = FamilyTag("transport", {"rows": r, "cols": c}).label()
    return PolytopeInstance(transport_matrix(k, l), b, label)


def gen_birkhoff(k: int) -> PolytopeInstance:
    return gen_transport(Margins2Way((1.0,) * k, (1.0,) * k), label=f"birkhoff(k={k})")


def independent_rows(a: np.ndarray, tol: float = 1e-9) -> list[int]:
    """Greedy in-order selection of a maximal linearly independent row subset."""
    kept = []
    basis = np.zeros((0, a.shape[1]))
    for i, row in enumerate(a):
        resid = row - basis.T @ (basis @ row)
        norm = np.linalg.norm(resid)
        if norm > tol * max(1.0, np.linalg.norm(row)):
            kept.append(i)
            basis = np.vstack([basis, resid / norm])
    return kept


def planar3_equations(r: int) -> np.ndarray:
    """All ``3 r^2`` line-sum equations over ``(i, j, k)`` lexicographic variables."""
    idx = np.arange(r**3).reshape(r, r, r)
    rows = []
    for axis in range(3):
        lines = np.moveaxis(idx, axis, -1).reshape(r * r, r)
        for line in lines:
            row = np.zeros(r**3)
            row[line] = 1.0
            rows.append(row)
    return np.array(rows)


def gen_planar3(r: int) -> PolytopeInstance:
    if r < 2:
        raise DomainError("planar3 needs r >= 2")
    full = planar3_equations(r)
    a = full[independent_rows(full)]
    expected = r**3 - (r - 1) ** 3
    if a.shape[0] != expected:
        raise RankDeficient(f"selected {a.shape[0]} equations, expected {expected}")
    return PolytopeInstance(a, np.ones(a.shape[0]), FamilyTag("planar3", {"r": r}).label())


def phase_margins(k: int, eps: float, sign: int) -> Margins2Way:
    last = 2.0 + sign * eps
    margins = (1.0,) * (k - 1) + (last,)
    return Margins2Way(margins, margins)


def gen_phase_transition(k: int, eps: float) -> tuple[PolytopeInstance, PolytopeInstance]:
    """``k x k`` transportation pair with last margins ``2 + eps`` and ``2 - eps``."""
    if k < 3:
        raise DomainError("phase transition demo needs k >= 3")
    if not 0 <= eps < 1:
        raise DomainError("eps must lie in [0, 1)")
    out = []
    for sign, name in ((1, "plus"), (-1, "minus")):
        label = f"phase(k={k};eps={eps!r};sign={name})"
        out.append(gen_transport(phase_margins(k, eps, sign), label=label))
    return out[0], out[1]


def gen_random(m: int, n: int, seed: int) -> PolytopeInstance:
    """Gaussian ``A`` whose first row is all ones, ``b = A x+`` for a random ``x+ > 0``.

    The all-ones row caps ``sum(x)`` and so keeps the polytope bounded; ``x+``
    witnesses a nonempty relative interior.
    """
    if not 1 <= m < n:
        raise DomainError(f"need 1 <= m < n, got m={m}, n={n}")
    rng = seeded_rng(seed)
    a = rng.standard_normal((m, n))
    a[0] = 1.0
    x_plus = rng.uniform(0.5, 1.5, size=n)
    inst = PolytopeInstance(a, a @ x_plus, FamilyTag("random", {"m": m, "n": n, "seed": seed}).label())
    if not validate(inst).is_full_row_rank:
        raise RankDeficient(f"random instance with seed {seed} is rank deficient")
    return inst


def random_transport_margins(k: int, l: int, rng: np.random.Generator) -> Margins2Way:
    """Random positive balanced margins with entries of order one."""
    r = rng.uniform(0.5, 2.0, size=k)
    c = rng.uniform(0.5, 2.0, size=l)
    c *= r.sum() / c.sum()
    # make the totals agree exactly in floating point
    c[-1] = r.sum() - c[:-1].sum()
    return Margins2Way(tuple(r), tuple(c))


__all__ = [
    "FamilyTag",
    "Margins2Way",
    "gen_birkhoff",
    "gen_phase_transition",
    "gen_planar3",
    "gen_random",
    "gen_simplex",
    "gen_transport",
    "independent_rows",
    "planar3_equations",
    "random_transport_margins",
    "transport_matrix",
]
