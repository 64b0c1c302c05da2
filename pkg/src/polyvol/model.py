"""Polytope instances ``P = {x >= 0 : A x = b}``, their JSON format and validation."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import IO, Optional, Union

import numpy as np

from .exceptions import NonFiniteEntry, ParseError, RankDeficient

RANK_TOL_FACTOR = 1e-10


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=np.float64, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class PolytopeInstance:
    """Constraint data ``A`` (m x n) and ``b`` (length m).

    Arrays are copied and made read-only on construction, so instances can be
    shared freely.
    """

    a_matrix: np.ndarray
    b_vector: np.ndarray
    label: Optional[str] = None

    def __post_init__(self):
        a = np.asarray(self.a_matrix, dtype=np.float64)
        b = np.asarray(self.b_vector, dtype=np.float64)
        if a.ndim != 2:
            raise ParseError(f"A must be a matrix, got shape {a.shape}")
        if b.ndim != 1:
            raise ParseError(f"b must be a vector, got shape {b.shape}")
        if b.shape[0] != a.shape[0]:
            raise ParseError(
                f"b has length {b.shape[0]} but A has {a.shape[0]} rows"
            )
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise NonFiniteEntry("A and b must contain only finite numbers")
        object.__setattr__(self, "a_matrix", _frozen(a))
        object.__setattr__(self, "b_vector", _frozen(b))

    @property
    def m(self) -> int:
        return self.a_matrix.shape[0]

    @property
    def n(self) -> int:
        return self.a_matrix.shape[1]

    @property
    def dim(self) -> int:
        return self.n - self.m

    def __eq__(self, other):
        if not isinstance(other, PolytopeInstance):
            return NotImplemented
        return (
            self.label == other.label
            and np.array_equal(self.a_matrix, other.a_matrix)
            and np.array_equal(self.b_vector, other.b_vector)
        )

    __hash__ = None

    def with_rhs(self, b_vector, label: Optional[str] = None) -> "PolytopeInstance":
        return PolytopeInstance(self.a_matrix, b_vector, label or self.label)

    def to_dict(self) -> dict:
        out = {
            "A": [[float(v) for v in row] for row in self.a_matrix],
            "b": [float(v) for v in self.b_vector],
        }
        if self.label is not None:
            out["label"] = self.label
        return out


@dataclass(frozen=True)
class ValidationReport:
    numeric_rank: int
    rank_tol_used: float
    is_full_row_rank: bool
    messages: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.messages


def _check_number(v, where: str) -> float:
    # bool is an int subclass; reject it explicitly
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ParseError(f"{where}: expected a number, got {v!r}")
    if not math.isfinite(v):
        raise NonFiniteEntry(f"{where}: non-finite entry {v!r}")
    return float(v)


def instance_from_dict(data) -> PolytopeInstance:
    if not isinstance(data, dict):
        raise ParseError("instance JSON must be an object")
    if "A" not in data or "b" not in data:
        raise ParseError('instance JSON needs keys "A" and "b"')
    rows, rhs = data["A"], data["b"]
    if not isinstance(rows, list) or not rows:
        raise ParseError('"A" must be a non-empty array of rows')
    if not isinstance(rhs, list):
        raise ParseError('"b" must be an array')
    width = None
    a = []
    for i, row in enumerate(rows):
        if not isinstance(row, list) or not row:
            raise ParseError(f"A[{i}] must be a non-empty array")
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise ParseError(f"ragged rows: A[{i}] has {len(row)} entries, expected {width}")
        a.append([_check_number(v, f"A[{i}][{j}]") for j, v in enumerate(row)])
    b = [_check_number(v, f"b[{i}]") for i, v in enumerate(rhs)]
    if len(b) != len(a):
        raise ParseError(f"b has length {len(b)} but A has {len(a)} rows")
    label = data.get("label")
    if label is not None and not isinstance(label, str):
        raise ParseError('"label" must be a string')
    return PolytopeInstance(np.array(a), np.array(b), label)


def _reject_constant(token):
    raise NonFiniteEntry(f"non-finite JSON constant {token}")


def load_instance(source: Union[str, bytes, IO]) -> PolytopeInstance:
    """Parse instance JSON from a string, bytes or a readable stream.

    Dimensions are inferred; rank is not checked (see :func:`validate`).
    """
    if hasattr(source, "read"):
        source = source.read()
    if isinstance(source, bytes):
        source = source.decode("utf-8")
    try:
        data = json.loads(source, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON: {exc}") from exc
    return instance_from_dict(data)


def dumps_instance(inst: PolytopeInstance, indent: Optional[int] = None) -> str:
    # float repr is the shortest round-trip decimal for binary64
    return json.dumps(inst.to_dict(), indent=indent)


def default_rank_tol(a_matrix: np.ndarray) -> float:
    scale = float(np.max(np.linalg.norm(a_matrix, axis=0), initial=0.0))
    return RANK_TOL_FACTOR * max(scale, np.finfo(float).tiny)


def validate(inst: PolytopeInstance, rank_tol: Optional[float] = None) -> ValidationReport:
    """Check the standing assumptions ``m < n`` and ``rank A = m``."""
    a = inst.a_matrix
    if rank_tol is None:
        rank_tol = default_rank_tol(a)
    if not rank_tol > 0:
        raise ValueError("rank_tol must be positive")
    messages = []
    if inst.m >= inst.n:
        messages.append(f"need m < n, got m={inst.m}, n={inst.n}")
    zero_rows = np.flatnonzero(~np.any(a != 0, axis=1))
    if zero_rows.size:
        messages.append(f"rows with no nonzero entry: {zero_rows.tolist()}")
    sv = np.linalg.svd(a, compute_uv=False)
    rank = int(np.sum(sv > rank_tol))
    full = rank == inst.m
    if not full:
        messages.append(f"A has numeric rank {rank} < m={inst.m} (tol {rank_tol:.3g})")
    return ValidationReport(rank, float(rank_tol), full, messages)


def check_instance(a_or_inst, b=None, rank_tol: Optional[float] = None) -> PolytopeInstance:
    """Coerce ``(A, b)`` or an instance and raise if the standing assumptions fail.

    This is the input-validation entry point used by the estimator API.
    """
    if isinstance(a_or_inst, PolytopeInstance):
        if b is not None:
            raise TypeError("pass either an instance or (A, b), not both")
        inst = a_or_inst
    else:
        if b is None:
            raise TypeError("b is required when A is given as an array")
        inst = PolytopeInstance(np.atleast_2d(np.asarray(a_or_inst, dtype=float)),
                                np.atleast_1d(np.asarray(b, dtype=float)))
    report = validate(inst, rank_tol)
    if not report.ok:
        raise RankDeficient("; ".join(report.messages))
    return inst
