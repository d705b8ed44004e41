"""
The Weyl isomorphism ∧_e^q V ⊗ ∧_o^m V* → ∧_o^{m-q} V*, the isomorphism i_q and the
representation of bilinear maps into odd m-covectors by exterior products.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Callable, Dict, Mapping, Tuple

import numpy as np

from oddforms.core.exceptions import GradeMismatchError, KindMismatchError, ParityMismatchError, ShapeMismatchError
from oddforms.core.logger import setup_logger
from oddforms.models.schemas import TensorSchema
from oddforms.services.exterior_algebra import (
    GradedElement,
    Kind,
    Parity,
    SpaceDescriptor,
    evaluate,
    interior_left,
    volume_covector,
    wedge_table,
)

logger = setup_logger(__name__)


@lru_cache(maxsize=None)
def weyl_matrix(dim: int, grade: int) -> np.ndarray:
    """Matrix of w ↦ w ⌟ (e_o∧e¹∧…∧e^m) from even q-vectors to odd (m-q)-covectors."""
    matrix = np.ascontiguousarray(wedge_table(dim, grade, dim - grade)[0].T)
    matrix.setflags(write=False)
    return matrix


def _require(element: GradedElement, kind: Kind, parity: Parity, what: str) -> None:
    if element.kind is not kind:
        raise KindMismatchError(f"{what} must be a {kind.value}")
    if element.parity is not parity:
        raise ParityMismatchError(f"{what} must be {parity.value}")


@dataclass(frozen=True, eq=False)
class TensorQM:
    """
    w ⊗ e with w an even q-vector and e an odd m-covector, kept in normal form:
    the scale of e is absorbed into w and e is the unit odd volume covector.
    """

    w: GradedElement
    e: GradedElement = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        _require(self.w, Kind.VECTOR, Parity.EVEN, "tensor factor w")
        unit = volume_covector(self.w.space)
        e = unit if self.e is None else self.e
        _require(e, Kind.COVECTOR, Parity.ODD, "tensor factor e")
        if e.grade != e.dim:
            raise GradeMismatchError(f"tensor factor e must have grade {e.dim}, got {e.grade}")
        if e.dim != self.w.dim:
            raise ShapeMismatchError((self.w.dim,), (e.dim,))
        object.__setattr__(self, "w", self.w * float(e.coefficients[0]))
        object.__setattr__(self, "e", unit)

    @classmethod
    def from_coefficients(cls, space: SpaceDescriptor, grade: int, values: np.ndarray) -> "TensorQM":
        return cls(GradedElement(space, Kind.VECTOR, Parity.EVEN, grade, values))

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "TensorQM":
        schema = TensorSchema.model_validate(data)
        return cls(GradedElement.from_json(schema.w.model_dump()), GradedElement.from_json(schema.e.model_dump()))

    @property
    def space(self) -> SpaceDescriptor:
        return self.w.space

    @property
    def grade(self) -> int:
        return self.w.grade

    @property
    def coefficients(self) -> np.ndarray:
        return self.w.coefficients

    def __add__(self, other: "TensorQM") -> "TensorQM":
        return TensorQM(self.w + other.w)

    def __mul__(self, scalar: float) -> "TensorQM":
        return TensorQM(self.w * scalar)

    __rmul__ = __mul__

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TensorQM):
            return NotImplemented
        return self.w == other.w

    __hash__ = None  # type: ignore[assignment]

    def to_json(self) -> Dict[str, Any]:
        return {"w": self.w.to_json(), "e": self.e.to_json()}


def weyl_map(t: TensorQM) -> GradedElement:
    """We(w ⊗ e) = w ⌟ e, an odd (m-q)-covector."""
    return interior_left(t.w, t.e)


def weyl_of(w: GradedElement) -> GradedElement:
    """We(w ⊗ e_o∧e¹∧…∧e^m) for an even q-vector w."""
    return weyl_map(TensorQM(w))


def minor_expansion(w: GradedElement, e: GradedElement) -> GradedElement:
    """
    w ⌟ e expanded over increasing tuples ν with the complementary tuple ν^c:
    Σ_ν (-1)^{Σ(ν_i - i)} w^ν e(e_1, …, e_m) e^{ν^c}.
    """
    _require(w, Kind.VECTOR, Parity.EVEN, "w")
    _require(e, Kind.COVECTOR, Parity.ODD, "e")
    space = w.space
    volume = evaluate(e, np.eye(space.dim))
    terms: Dict[Tuple[int, ...], float] = {}
    for nu, w_nu in w.table.items():
        sign = -1.0 if sum(index - position for position, index in enumerate(nu)) % 2 else 1.0
        complement = tuple(index for index in range(space.dim) if index not in nu)
        terms[complement] = sign * w_nu * volume
    return GradedElement.from_mapping(space, Kind.COVECTOR, Parity.ODD, space.dim - w.grade, terms)


@dataclass(frozen=True, eq=False)
class HomQM:
    """A linear map from even q-covectors to odd m-covectors, as a 1 × C(m,q) matrix."""

    space: SpaceDescriptor
    grade: int
    matrix: np.ndarray

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=float).reshape(1, -1)
        expected = (1, self.space.size(self.grade))
        if matrix.shape != expected:
            raise ShapeMismatchError(expected, matrix.shape)
        matrix.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)

    @classmethod
    def from_pairing(cls, w0: GradedElement, e0: GradedElement) -> "HomQM":
        """l(a) = ⟨a, w0⟩ e0."""
        _require(w0, Kind.VECTOR, Parity.EVEN, "w0")
        _require(e0, Kind.COVECTOR, Parity.ODD, "e0")
        return cls(w0.space, w0.grade, float(e0.coefficients[0]) * w0.coefficients)

    def __call__(self, a: GradedElement) -> GradedElement:
        _require(a, Kind.COVECTOR, Parity.EVEN, "argument")
        if a.grade != self.grade:
            raise GradeMismatchError(f"expected a {self.grade}-covector, got grade {a.grade}")
        return GradedElement(self.space, Kind.COVECTOR, Parity.ODD, self.space.dim, self.matrix @ a.coefficients)


def tensor_pairing(t: TensorQM, a: GradedElement, u: GradedElement) -> float:
    """⟨w ⊗ e, a ⊗ u⟩ = ⟨a, w⟩⟨e, u⟩."""
    _require(a, Kind.COVECTOR, Parity.EVEN, "a")
    _require(u, Kind.VECTOR, Parity.ODD, "u")
    return float(np.dot(a.coefficients, t.w.coefficients) * np.dot(t.e.coefficients, u.coefficients))


def iq_forward(l: HomQM) -> TensorQM:
    return TensorQM.from_coefficients(l.space, l.grade, l.matrix[0])


def iq_inverse(t: TensorQM) -> HomQM:
    return HomQM(t.space, t.grade, t.w.coefficients)


@dataclass(frozen=True, eq=False)
class BilinearForm:
    """b: ∧_e^q V* × ∧_e^{q'} V* → ∧_o^m V*, b(a, a') = (aᵀ B a') e_o∧e¹∧…∧e^m."""

    space: SpaceDescriptor
    left_grade: int
    right_grade: int
    tensor: np.ndarray

    def __post_init__(self):
        tensor = np.array(self.tensor, dtype=float)
        expected = (self.space.size(self.left_grade), self.space.size(self.right_grade))
        if tensor.shape != expected:
            raise ShapeMismatchError(expected, tensor.shape)
        tensor.setflags(write=False)
        object.__setattr__(self, "tensor", tensor)

    def _check(self, a: GradedElement, grade: int) -> None:
        _require(a, Kind.COVECTOR, Parity.EVEN, "argument")
        if a.grade != grade:
            raise GradeMismatchError(f"expected a {grade}-covector, got grade {a.grade}")

    def __call__(self, a: GradedElement, a_prime: GradedElement) -> GradedElement:
        self._check(a, self.left_grade)
        self._check(a_prime, self.right_grade)
        value = a.coefficients @ self.tensor @ a_prime.coefficients
        return GradedElement(self.space, Kind.COVECTOR, Parity.ODD, self.space.dim, [value])

    def bar(self, a: GradedElement) -> GradedElement:
        """b̄(a), the even q'-vector with b(a, a') = a' ∧ We(b̄(a))."""
        self._check(a, self.left_grade)
        return GradedElement(self.space, Kind.VECTOR, Parity.EVEN, self.right_grade, a.coefficients @ self.tensor)

    def double_bar(self, a_prime: GradedElement) -> GradedElement:
        """b̿(a'), the even q-vector with b(a, a') = a ∧ We(b̿(a'))."""
        self._check(a_prime, self.right_grade)
        return GradedElement(self.space, Kind.VECTOR, Parity.EVEN, self.left_grade, self.tensor @ a_prime.coefficients)

    def transpose(self) -> "BilinearForm":
        return BilinearForm(self.space, self.right_grade, self.left_grade, self.tensor.T)

    def is_symmetric(self, tol: float = 0.0) -> bool:
        if self.left_grade != self.right_grade:
            return False
        return bool(np.max(np.abs(self.tensor - self.tensor.T), initial=0.0) <= tol)


def represent_bilinear(
    b: BilinearForm,
) -> Tuple[Callable[[GradedElement], GradedElement], Callable[[GradedElement], GradedElement]]:
    """The associated linear maps (b̄, b̿)."""
    return b.bar, b.double_bar
