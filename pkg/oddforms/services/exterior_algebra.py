"""
Even/odd multivector and multicovector algebra over an m-dimensional real space.

Elements are stored as dense coefficient vectors over the strictly increasing index
tuples of their grade (lexicographic order). Odd elements are stored as their value at
the reference orientation; `reorient` reconstructs the value at the other orientation.
Index tuples are always 0-based internally; `SpaceDescriptor.first_label` only affects
how tuples are printed and serialized.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from itertools import combinations
from math import comb
from typing import Any, Dict, Mapping, Sequence, Tuple

import numpy as np

from oddforms.core.exceptions import (
    DimensionMismatchError,
    GradeMismatchError,
    GradeOverflowError,
    KindMismatchError,
    ParityMismatchError,
    ShapeMismatchError,
)
from oddforms.core.logger import setup_logger

logger = setup_logger(__name__)

IndexTuple = Tuple[int, ...]


class Kind(str, Enum):
    COVECTOR = "covector"
    VECTOR = "vector"


class Parity(str, Enum):
    EVEN = "even"
    ODD = "odd"

    @property
    def sign(self) -> int:
        return 1 if self is Parity.EVEN else -1

    @classmethod
    def from_sign(cls, sign: int) -> "Parity":
        return cls.EVEN if sign > 0 else cls.ODD

    def __mul__(self, other: "Parity") -> "Parity":  # type: ignore[override]
        return Parity.from_sign(self.sign * other.sign)


@dataclass(frozen=True)
class Orientation:
    """One of the two orientations of V, as a sign relative to the reference orientation."""

    sign: int = 1

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError(f"orientation sign must be +1 or -1, got {self.sign}")

    def reversed(self) -> "Orientation":
        """The parity action P."""
        return Orientation(-self.sign)

    @property
    def is_reference(self) -> bool:
        return self.sign == 1


REFERENCE_ORIENTATION = Orientation(1)


@lru_cache(maxsize=None)
def basis_tuples(dim: int, grade: int) -> Tuple[IndexTuple, ...]:
    if grade < 0 or grade > dim:
        return ()
    return tuple(combinations(range(dim), grade))


@lru_cache(maxsize=None)
def tuple_positions(dim: int, grade: int) -> Dict[IndexTuple, int]:
    return {indices: position for position, indices in enumerate(basis_tuples(dim, grade))}


def permutation_sign(sequence: Sequence[int]) -> int:
    """Sign of the permutation sorting `sequence`; 0 when an entry repeats."""
    if len(set(sequence)) != len(sequence):
        return 0
    inversions = sum(
        1
        for i in range(len(sequence))
        for j in range(i + 1, len(sequence))
        if sequence[i] > sequence[j]
    )
    return -1 if inversions % 2 else 1


@lru_cache(maxsize=None)
def wedge_table(dim: int, left: int, right: int) -> np.ndarray:
    """
    Structure constants of the exterior product.

    T[k, i, j] is the coefficient of basis element k in (basis i of grade `left`) ∧
    (basis j of grade `right`): the sign of the shuffle sorting the concatenation.
    """
    positions = tuple_positions(dim, left + right)
    table = np.zeros((comb(dim, left + right), comb(dim, left), comb(dim, right)))
    for i, first in enumerate(basis_tuples(dim, left)):
        for j, second in enumerate(basis_tuples(dim, right)):
            joined = first + second
            sign = permutation_sign(joined)
            if sign:
                table[positions[tuple(sorted(joined))], i, j] = sign
    table.setflags(write=False)
    return table


@dataclass(frozen=True)
class SpaceDescriptor:
    """An m-dimensional space with a fixed reference basis and reference orientation."""

    dim: int
    first_label: int = 1
    orientation: Orientation = REFERENCE_ORIENTATION

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError(f"space dimension must be >= 1, got {self.dim}")

    @classmethod
    def minkowski(cls) -> "SpaceDescriptor":
        """Four dimensions with basis labels 0..3."""
        return cls(4, first_label=0)

    @property
    def labels(self) -> Tuple[int, ...]:
        return tuple(range(self.first_label, self.first_label + self.dim))

    def basis(self, grade: int) -> Tuple[IndexTuple, ...]:
        return basis_tuples(self.dim, grade)

    def size(self, grade: int) -> int:
        return comb(self.dim, grade) if 0 <= grade <= self.dim else 0

    def format_tuple(self, indices: IndexTuple) -> str:
        return ",".join(str(index + self.first_label) for index in indices)

    def parse_tuple(self, text: str) -> IndexTuple:
        text = text.strip()
        if not text:
            return ()
        indices = tuple(int(part) - self.first_label for part in text.split(","))
        for index in indices:
            if not 0 <= index < self.dim:
                raise ValueError(f"label {index + self.first_label} outside {self.labels}")
        return indices


@dataclass(frozen=True, eq=False)
class GradedElement:
    """A q-vector or q-covector of definite parity."""

    space: SpaceDescriptor
    kind: Kind
    parity: Parity
    grade: int
    coefficients: np.ndarray = field(repr=False)

    __array_ufunc__ = None

    def __post_init__(self):
        if not 0 <= self.grade <= self.space.dim:
            raise GradeOverflowError(self.grade, self.space.dim)
        values = np.array(self.coefficients, dtype=float).reshape(-1)
        expected = (self.space.size(self.grade),)
        if values.shape != expected:
            raise ShapeMismatchError(expected, values.shape)
        values.setflags(write=False)
        object.__setattr__(self, "kind", Kind(self.kind))
        object.__setattr__(self, "parity", Parity(self.parity))
        object.__setattr__(self, "coefficients", values)

    # -- constructors ---------------------------------------------------------------

    @classmethod
    def zero(cls, space: SpaceDescriptor, kind: Kind, parity: Parity, grade: int) -> "GradedElement":
        return cls(space, kind, parity, grade, np.zeros(space.size(grade)))

    @classmethod
    def from_mapping(
        cls,
        space: SpaceDescriptor,
        kind: Kind,
        parity: Parity,
        grade: int,
        mapping: Mapping[Sequence[int], float],
    ) -> "GradedElement":
        """Build from arbitrary 0-based index tuples, normalizing by permutation sign."""
        values = np.zeros(space.size(grade))
        positions = tuple_positions(space.dim, grade)
        for indices, value in mapping.items():
            indices = tuple(indices)
            if len(indices) != grade:
                raise GradeMismatchError(f"index tuple {indices} has length {len(indices)}, grade is {grade}")
            if any(not 0 <= index < space.dim for index in indices):
                raise ValueError(f"index tuple {indices} outside 0..{space.dim - 1}")
            sign = permutation_sign(indices)
            if sign:
                values[positions[tuple(sorted(indices))]] += sign * float(value)
        return cls(space, kind, parity, grade, values)

    @classmethod
    def basis_element(
        cls, space: SpaceDescriptor, kind: Kind, parity: Parity, indices: Sequence[int]
    ) -> "GradedElement":
        return cls.from_mapping(space, kind, parity, len(indices), {tuple(indices): 1.0})

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "GradedElement":
        from oddforms.models.schemas import GradedElementSchema

        schema = GradedElementSchema.model_validate(data)
        space = SpaceDescriptor(schema.dim, first_label=schema.first_label)
        positions = tuple_positions(space.dim, schema.grade)
        values = np.zeros(space.size(schema.grade))
        for label, value in schema.coeffs.items():
            indices = space.parse_tuple(label)
            if indices not in positions:
                raise ValueError(f"coefficient key '{label}' is not a strictly increasing {schema.grade}-tuple")
            values[positions[indices]] = value
        return cls(space, schema.kind, schema.parity, schema.grade, values)

    # -- views ----------------------------------------------------------------------

    @property
    def dim(self) -> int:
        return self.space.dim

    @property
    def table(self) -> Dict[IndexTuple, float]:
        return {indices: float(value) for indices, value in zip(self.space.basis(self.grade), self.coefficients)}

    def coefficient(self, indices: Sequence[int]) -> float:
        indices = tuple(indices)
        sign = permutation_sign(indices)
        if not sign:
            return 0.0
        return sign * float(self.coefficients[tuple_positions(self.dim, self.grade)[tuple(sorted(indices))]])

    @property
    def signature(self) -> Tuple[SpaceDescriptor, Kind, Parity, int]:
        return (self.space, self.kind, self.parity, self.grade)

    def with_coefficients(self, values: np.ndarray) -> "GradedElement":
        return GradedElement(self.space, self.kind, self.parity, self.grade, values)

    def with_parity(self, parity: Parity) -> "GradedElement":
        return GradedElement(self.space, self.kind, parity, self.grade, self.coefficients)

    def norm(self) -> float:
        return float(np.max(np.abs(self.coefficients))) if self.coefficients.size else 0.0

    def is_zero(self, tol: float = 0.0) -> bool:
        return self.norm() <= tol

    def allclose(self, other: "GradedElement", atol: float = 1e-12) -> bool:
        self._require_compatible(other)
        return bool(np.allclose(self.coefficients, other.coefficients, rtol=0.0, atol=atol))

    def to_json(self) -> Dict[str, Any]:
        return {
            "kind": self.kind.value,
            "parity": self.parity.value,
            "grade": self.grade,
            "dim": self.dim,
            "first_label": self.space.first_label,
            "coeffs": {
                self.space.format_tuple(indices): float(value)
                for indices, value in zip(self.space.basis(self.grade), self.coefficients)
            },
        }

    # -- linear structure ---------------------------------------------------------------

    def _require_compatible(self, other: "GradedElement") -> None:
        _require_same_dim(self, other)
        if self.kind is not other.kind:
            raise KindMismatchError(f"{self.kind.value} vs {other.kind.value}")
        if self.grade != other.grade:
            raise GradeMismatchError(f"{self.grade} vs {other.grade}")
        if self.parity is not other.parity:
            raise ParityMismatchError(f"{self.parity.value} vs {other.parity.value}")

    def __add__(self, other: "GradedElement") -> "GradedElement":
        self._require_compatible(other)
        return self.with_coefficients(self.coefficients + other.coefficients)

    def __sub__(self, other: "GradedElement") -> "GradedElement":
        self._require_compatible(other)
        return self.with_coefficients(self.coefficients - other.coefficients)

    def __neg__(self) -> "GradedElement":
        return self.with_coefficients(-self.coefficients)

    def __mul__(self, scalar: float) -> "GradedElement":
        return self.with_coefficients(float(scalar) * self.coefficients)

    __rmul__ = __mul__

    def __truediv__(self, scalar: float) -> "GradedElement":
        return self.with_coefficients(self.coefficients / float(scalar))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GradedElement):
            return NotImplemented
        return self.signature == other.signature and bool(np.array_equal(self.coefficients, other.coefficients))

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        nonzero = {
            self.space.format_tuple(indices): float(value)
            for indices, value in zip(self.space.basis(self.grade), self.coefficients)
            if value != 0.0
        }
        return f"GradedElement({self.parity.value} {self.grade}-{self.kind.value}, dim={self.dim}, {nonzero})"


# -- convenience constructors ---------------------------------------------------------------


def covector(space: SpaceDescriptor, mapping: Mapping[Sequence[int], float], grade: int, parity: Parity = Parity.EVEN) -> GradedElement:
    return GradedElement.from_mapping(space, Kind.COVECTOR, parity, grade, mapping)


def vector(space: SpaceDescriptor, mapping: Mapping[Sequence[int], float], grade: int, parity: Parity = Parity.EVEN) -> GradedElement:
    return GradedElement.from_mapping(space, Kind.VECTOR, parity, grade, mapping)


def unit_scalar(space: SpaceDescriptor, parity: Parity, kind: Kind = Kind.COVECTOR) -> GradedElement:
    """e_e (even) or e_o (odd): the grade-0 elements with value 1 at the reference orientation."""
    return GradedElement(space, kind, parity, 0, np.ones(1))


def volume_covector(space: SpaceDescriptor) -> GradedElement:
    """The odd m-covector e_o ∧ e^1 ∧ … ∧ e^m."""
    return GradedElement(space, Kind.COVECTOR, Parity.ODD, space.dim, np.ones(1))


def volume_vector(space: SpaceDescriptor) -> GradedElement:
    """The odd m-vector dual to `volume_covector`."""
    return GradedElement(space, Kind.VECTOR, Parity.ODD, space.dim, np.ones(1))


# -- operations -------------------------------------------------------------------------------


def _require_same_dim(x: GradedElement, y: GradedElement) -> None:
    if x.dim != y.dim:
        raise DimensionMismatchError(x.dim, y.dim)


def pair(a: GradedElement, w: GradedElement) -> float:
    """The evaluation ⟨a, w⟩ of a q-covector on a q-vector of the same parity."""
    if a.kind is not Kind.COVECTOR or w.kind is not Kind.VECTOR:
        raise KindMismatchError(f"pair expects (covector, vector), got ({a.kind.value}, {w.kind.value})")
    _require_same_dim(a, w)
    if a.grade != w.grade:
        raise GradeMismatchError(f"pairing a {a.grade}-covector with a {w.grade}-vector")
    if a.parity is not w.parity:
        raise ParityMismatchError(f"pairing an {a.parity.value} covector with an {w.parity.value} vector")
    return float(np.dot(a.coefficients, w.coefficients))


def wedge(x: GradedElement, y: GradedElement) -> GradedElement:
    if x.kind is not y.kind:
        raise KindMismatchError(f"wedge of a {x.kind.value} and a {y.kind.value}")
    _require_same_dim(x, y)
    grade = x.grade + y.grade
    if grade > x.dim:
        raise GradeOverflowError(grade, x.dim)
    table = wedge_table(x.dim, x.grade, y.grade)
    values = np.einsum("kij,i,j->k", table, x.coefficients, y.coefficients)
    return GradedElement(x.space, x.kind, x.parity * y.parity, grade, values)


def interior_left(w: GradedElement, a: GradedElement) -> GradedElement:
    """w ⌟ a, characterized by ⟨w ⌟ a, w′⟩ = ⟨a, w ∧ w′⟩."""
    if w.kind is not Kind.VECTOR or a.kind is not Kind.COVECTOR:
        raise KindMismatchError("left interior product expects (vector, covector)")
    _require_same_dim(w, a)
    if w.grade > a.grade:
        raise GradeMismatchError(f"left interior product of a {w.grade}-vector into a {a.grade}-covector")
    table = wedge_table(w.dim, w.grade, a.grade - w.grade)
    values = np.einsum("kij,k,i->j", table, a.coefficients, w.coefficients)
    return GradedElement(w.space, Kind.COVECTOR, w.parity * a.parity, a.grade - w.grade, values)


def interior_right(w: GradedElement, a: GradedElement) -> GradedElement:
    """
    w ⌞ a, characterized by ⟨a′, w ⌞ a⟩ = ⟨a′ ∧ a, w⟩.

    The adjunction pairs the result with covectors a′ of grade q − q′, so the result is a
    (q − q′)-vector.
    """
    if w.kind is not Kind.VECTOR or a.kind is not Kind.COVECTOR:
        raise KindMismatchError("right interior product expects (vector, covector)")
    _require_same_dim(w, a)
    if w.grade < a.grade:
        raise GradeMismatchError(f"right interior product of a {w.grade}-vector with a {a.grade}-covector")
    table = wedge_table(w.dim, w.grade - a.grade, a.grade)
    values = np.einsum("kij,k,j->i", table, w.coefficients, a.coefficients)
    return GradedElement(w.space, Kind.VECTOR, w.parity * a.parity, w.grade - a.grade, values)


def reorient(x: GradedElement, orientation: Orientation) -> np.ndarray:
    """Coefficient table of x evaluated at `orientation` (odd elements flip under P)."""
    factor = 1.0 if x.parity is Parity.EVEN else float(orientation.sign)
    values = factor * x.coefficients
    values.setflags(write=False)
    return values


def minors(vectors: np.ndarray, grade: int) -> np.ndarray:
    """
    Coordinates of v_1 ∧ … ∧ v_q in the basis e_I: det(⟨e^{I_r}, v_s⟩) for every I.

    `vectors` has shape (..., q, m); the result has shape (..., C(m, q)).
    """
    vectors = np.asarray(vectors, dtype=float)
    dim = vectors.shape[-1]
    if grade == 0:
        return np.ones(vectors.shape[:-2] + (1,))
    columns = [np.linalg.det(vectors[..., :, list(indices)]) for indices in basis_tuples(dim, grade)]
    return np.stack(columns, axis=-1)


def simple_vector(
    space: SpaceDescriptor,
    vectors: np.ndarray,
    parity: Parity = Parity.EVEN,
    orientation: Orientation = REFERENCE_ORIENTATION,
) -> GradedElement:
    """The multivector represented by (v_1, …, v_q, o)."""
    vectors = np.asarray(vectors, dtype=float).reshape(-1, space.dim)
    factor = 1.0 if parity is Parity.EVEN else float(orientation.sign)
    return GradedElement(space, Kind.VECTOR, parity, vectors.shape[0], factor * minors(vectors, vectors.shape[0]))


def evaluate(a: GradedElement, vectors: np.ndarray, orientation: Orientation = REFERENCE_ORIENTATION) -> float:
    """a(v_1, …, v_q, o) by multilinear expansion."""
    if a.kind is not Kind.COVECTOR:
        raise KindMismatchError("only covectors can be evaluated on vectors")
    vectors = np.asarray(vectors, dtype=float).reshape(-1, a.dim) if a.grade else np.zeros((0, a.dim))
    if vectors.shape[0] != a.grade:
        raise GradeMismatchError(f"{a.grade}-covector evaluated on {vectors.shape[0]} vectors")
    total = 0.0
    for indices, value in zip(a.space.basis(a.grade), reorient(a, orientation)):
        block = vectors[:, list(indices)]
        total += value * (np.linalg.det(block) if a.grade else 1.0)
    return float(total)
