"""
Differential forms on an affine space, cells and chains with their boundaries, integration
by tensor Gauss–Legendre quadrature on [0,1]^q, and currents (chain-backed, cube domains
and Dirac currents wδ(x)).
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
import sympy
from scipy import special

from oddforms.core.config import get_settings
from oddforms.core.exceptions import (
    DegreeMismatchError,
    DimensionMismatchError,
    GradeMismatchError,
    GradeOverflowError,
    MissingDerivativeError,
    ParityMismatchError,
    ShapeMismatchError,
    SupportViolationError,
)
from oddforms.core.logger import setup_logger
from oddforms.models.schemas import CubeDomainSpec, DiracSpec
from oddforms.services.exterior_algebra import (
    REFERENCE_ORIENTATION,
    GradedElement,
    Kind,
    Orientation,
    Parity,
    SpaceDescriptor,
    minors,
    pair,
    wedge_table,
)
from oddforms.services.fields import (
    BilinearField,
    CoefficientField,
    ConstantField,
    ExpressionField,
    LinearMapField,
    as_points,
)

logger = setup_logger(__name__)


# Regions ---------------------------------------------------------------------------------


class Region(ABC):
    """An open subset U of the affine chart on which a form is defined."""

    @abstractmethod
    def contains_point(self, point: Sequence[float]) -> bool:
        ...

    @abstractmethod
    def contains_box(self, lower: Sequence[float], upper: Sequence[float]) -> bool:
        """True when the closed box [lower, upper] lies inside the region."""


@dataclass(frozen=True)
class Box(Region):
    lower: Tuple[float, ...]
    upper: Tuple[float, ...]

    def contains_point(self, point: Sequence[float]) -> bool:
        return self.contains_box(point, point)

    def contains_box(self, lower: Sequence[float], upper: Sequence[float]) -> bool:
        return bool(np.all(np.asarray(self.lower) < np.asarray(lower)) and np.all(np.asarray(upper) < np.asarray(self.upper)))


@dataclass(frozen=True)
class OffAxis(Region):
    """Everything except the points whose coordinates along `axes` all vanish."""

    axes: Tuple[int, ...] = (1, 2, 3)

    def contains_point(self, point: Sequence[float]) -> bool:
        return any(point[axis] != 0.0 for axis in self.axes)

    def contains_box(self, lower: Sequence[float], upper: Sequence[float]) -> bool:
        return any(lower[axis] > 0.0 or upper[axis] < 0.0 for axis in self.axes)


@dataclass(frozen=True)
class Intersection(Region):
    regions: Tuple[Region, ...]

    def contains_point(self, point: Sequence[float]) -> bool:
        return all(region.contains_point(point) for region in self.regions)

    def contains_box(self, lower: Sequence[float], upper: Sequence[float]) -> bool:
        return all(region.contains_box(lower, upper) for region in self.regions)


def intersect(first: Optional[Region], second: Optional[Region]) -> Optional[Region]:
    if first is None or first == second:
        return second
    if second is None:
        return first
    return Intersection((first, second))


# Forms -------------------------------------------------------------------------------------


@lru_cache(maxsize=None)
def derivative_matrix(dim: int, grade: int) -> np.ndarray:
    """D[J, I·m + μ]: coefficient of e^J in e^μ ∧ e^I, so that (dA)_J = D · ∇A."""
    table = wedge_table(dim, 1, grade)
    matrix = np.ascontiguousarray(np.transpose(table, (0, 2, 1)).reshape(table.shape[0], -1))
    matrix.setflags(write=False)
    return matrix


@dataclass(frozen=True, eq=False)
class SmoothForm:
    """A q-form of definite parity, i.e. a q-covector field x ↦ Ã(x)."""

    space: SpaceDescriptor
    parity: Parity
    grade: int
    field: CoefficientField
    domain: Optional[Region] = None
    name: str = ""

    __array_ufunc__ = None

    def __post_init__(self):
        if not 0 <= self.grade <= self.space.dim:
            raise GradeOverflowError(self.grade, self.space.dim)
        if self.field.dim != self.space.dim:
            raise DimensionMismatchError(self.space.dim, self.field.dim)
        if self.field.size != self.space.size(self.grade):
            raise ShapeMismatchError((self.space.size(self.grade),), (self.field.size,))
        object.__setattr__(self, "parity", Parity(self.parity))

    @classmethod
    def constant(cls, element: GradedElement, domain: Optional[Region] = None) -> "SmoothForm":
        if element.kind is not Kind.COVECTOR:
            raise GradeMismatchError("a form takes covector values")
        return cls(element.space, element.parity, element.grade, ConstantField(element.dim, element.coefficients), domain)

    @classmethod
    def zero(cls, space: SpaceDescriptor, parity: Parity, grade: int) -> "SmoothForm":
        return cls(space, parity, grade, ConstantField(space.dim, np.zeros(space.size(grade))), name="zero")

    @classmethod
    def from_expressions(
        cls,
        space: SpaceDescriptor,
        parity: Parity,
        grade: int,
        expressions: Sequence[sympy.Expr],
        domain: Optional[Region] = None,
    ) -> "SmoothForm":
        """Coefficients given as sympy expressions in x0 … x_{m-1}, one per increasing tuple."""
        return cls(space, parity, grade, ExpressionField(space.dim, expressions), domain)

    def coefficients(self, points: np.ndarray) -> np.ndarray:
        return self.field.values(points)

    def at(self, point: Sequence[float]) -> GradedElement:
        return GradedElement(self.space, Kind.COVECTOR, self.parity, self.grade, self.field(point))

    def exterior_derivative(self, require_analytic: bool = False) -> "SmoothForm":
        return exterior_derivative(self, require_analytic)

    def with_domain(self, domain: Optional[Region]) -> "SmoothForm":
        return SmoothForm(self.space, self.parity, self.grade, self.field, domain, self.name)

    def _require_compatible(self, other: "SmoothForm") -> None:
        if self.space.dim != other.space.dim:
            raise DimensionMismatchError(self.space.dim, other.space.dim)
        if self.grade != other.grade:
            raise GradeMismatchError(f"{self.grade}-form vs {other.grade}-form")
        if self.parity is not other.parity:
            raise ParityMismatchError(f"{self.parity.value} form vs {other.parity.value} form")

    def __add__(self, other: "SmoothForm") -> "SmoothForm":
        self._require_compatible(other)
        return SmoothForm(self.space, self.parity, self.grade, self.field + other.field, intersect(self.domain, other.domain))

    def __sub__(self, other: "SmoothForm") -> "SmoothForm":
        self._require_compatible(other)
        return SmoothForm(self.space, self.parity, self.grade, self.field - other.field, intersect(self.domain, other.domain))

    def __neg__(self) -> "SmoothForm":
        return self * -1.0

    def __mul__(self, scalar: float) -> "SmoothForm":
        return SmoothForm(self.space, self.parity, self.grade, self.field.scaled(scalar), self.domain)

    __rmul__ = __mul__


def exterior_derivative(form: SmoothForm, require_analytic: bool = False) -> SmoothForm:
    """dA: grade q+1, same parity; uses the analytic gradient of the coefficient field when present."""
    if form.grade >= form.space.dim:
        raise GradeOverflowError(form.grade + 1, form.space.dim)
    if require_analytic and not form.field.has_analytic_gradient:
        raise MissingDerivativeError(f"{form.name or 'form'} has no analytic derivative")
    gradient = form.field.gradient()
    field = LinearMapField(derivative_matrix(form.space.dim, form.grade), gradient)
    return SmoothForm(form.space, form.parity, form.grade + 1, field, form.domain, f"d{form.name}" if form.name else "")


def wedge_forms(first: SmoothForm, second: SmoothForm) -> SmoothForm:
    if first.space.dim != second.space.dim:
        raise DimensionMismatchError(first.space.dim, second.space.dim)
    grade = first.grade + second.grade
    if grade > first.space.dim:
        raise GradeOverflowError(grade, first.space.dim)
    field = BilinearField(wedge_table(first.space.dim, first.grade, second.grade), first.field, second.field)
    return SmoothForm(first.space, first.parity * second.parity, grade, field, intersect(first.domain, second.domain))


def apply_linear(matrix: np.ndarray, form: SmoothForm, parity: Parity, grade: int) -> SmoothForm:
    """Pointwise application of a constant linear map between covector spaces."""
    return SmoothForm(form.space, parity, grade, LinearMapField(matrix, form.field), form.domain)


# Cells and chains -----------------------------------------------------------------------------


def parameter_stack(s: np.ndarray, grade: int) -> np.ndarray:
    """Parameters as an (N, q) stack; a 0-cell takes the single empty parameter."""
    s = np.asarray(s, dtype=float)
    if s.ndim == 2:
        return s.reshape(s.shape[0], grade)
    return s.reshape(-1, grade) if grade else np.zeros((1, 0))


@lru_cache(maxsize=None)
def unit_cube_rule(order: int, grade: int) -> Tuple[np.ndarray, np.ndarray]:
    """Tensor Gauss–Legendre nodes (N, q) and weights (N,) on [0,1]^q."""
    nodes, weights = special.roots_legendre(order)
    nodes, weights = (nodes + 1.0) / 2.0, weights / 2.0
    if grade == 0:
        grid, total = np.zeros((1, 0)), np.ones(1)
    else:
        grid = np.stack(np.meshgrid(*([nodes] * grade), indexing="ij"), axis=-1).reshape(-1, grade)
        total = np.prod(np.stack(np.meshgrid(*([weights] * grade), indexing="ij"), axis=-1).reshape(-1, grade), axis=1)
    grid.setflags(write=False)
    total.setflags(write=False)
    return grid, total


class Cell:
    """A pair (χ, o) with χ: [0,1]^q → M and o an orientation of V."""

    def __init__(
        self,
        space: SpaceDescriptor,
        grade: int,
        chart: Callable[[np.ndarray], np.ndarray],
        tangents: Optional[Callable[[np.ndarray], np.ndarray]] = None,
        orientation: Orientation = REFERENCE_ORIENTATION,
        fd_step: Optional[float] = None,
    ):
        if not 0 <= grade <= space.dim:
            raise GradeOverflowError(grade, space.dim)
        self.space = space
        self.grade = grade
        self.chart = chart
        self.tangents = tangents
        self.orientation = orientation
        self.fd_step = float(fd_step if fd_step is not None else get_settings().fd_step)

    @classmethod
    def affine(
        cls,
        space: SpaceDescriptor,
        origin: Sequence[float],
        edges: Sequence[Sequence[float]],
        orientation: Orientation = REFERENCE_ORIENTATION,
    ) -> "Cell":
        """χ(s) = origin + Σ s_i edge_i."""
        origin = np.asarray(origin, dtype=float)
        edges = np.asarray(edges, dtype=float).reshape(-1, space.dim)
        return cls(
            space,
            edges.shape[0],
            lambda s: origin + s @ edges,
            lambda s: np.broadcast_to(edges, (s.shape[0],) + edges.shape),
            orientation,
        )

    @classmethod
    def point(cls, space: SpaceDescriptor, x: Sequence[float], orientation: Orientation = REFERENCE_ORIENTATION) -> "Cell":
        return cls.affine(space, x, np.zeros((0, space.dim)), orientation)

    @classmethod
    def from_expressions(
        cls,
        space: SpaceDescriptor,
        expressions: Sequence[sympy.Expr],
        grade: int,
        orientation: Orientation = REFERENCE_ORIENTATION,
    ) -> "Cell":
        """χ given by m sympy expressions in s0 … s_{q-1}; tangents are differentiated symbolically."""
        symbols = tuple(sympy.symbols(f"s0:{grade}", real=True))
        chart_field = ExpressionField(grade, expressions, symbols)
        tangent_field = chart_field.gradient()
        return cls(
            space,
            grade,
            chart_field.values,
            lambda s: np.swapaxes(tangent_field.values(s).reshape(s.shape[0], space.dim, grade), 1, 2),
            orientation,
        )

    def at(self, s: np.ndarray) -> np.ndarray:
        s = parameter_stack(s, self.grade)
        return np.asarray(self.chart(s), dtype=float).reshape(s.shape[0], self.space.dim)

    def tangent_vectors(self, s: np.ndarray) -> np.ndarray:
        """(N, q, m): the partial derivatives D_iχ(s)."""
        s = parameter_stack(s, self.grade)
        if self.tangents is not None:
            return np.asarray(self.tangents(s), dtype=float).reshape(s.shape[0], self.grade, self.space.dim)
        result = np.empty((s.shape[0], self.grade, self.space.dim))
        for axis in range(self.grade):
            offset = np.zeros(self.grade)
            offset[axis] = self.fd_step
            result[:, axis, :] = (self.at(s + offset) - self.at(s - offset)) / (2.0 * self.fd_step)
        return result

    def reoriented(self, orientation: Orientation) -> "Cell":
        return Cell(self.space, self.grade, self.chart, self.tangents, orientation, self.fd_step)

    def face(self, axis: int, value: float) -> "Cell":
        """χ^{(i, α)}: the face where coordinate `axis` (0-based) is fixed to α ∈ {0, 1}."""
        keep = [j for j in range(self.grade) if j != axis]

        def lift(s: np.ndarray) -> np.ndarray:
            return np.insert(parameter_stack(s, self.grade - 1), axis, value, axis=1)

        return Cell(
            self.space,
            self.grade - 1,
            lambda s: self.at(lift(s)),
            lambda s: self.tangent_vectors(lift(s))[:, keep, :],
            self.orientation,
            self.fd_step,
        )

    def faces(self) -> List[Tuple[float, "Cell"]]:
        """Signed faces: Σ_i (-1)^{i-1} [(χ^{(i,1)}, o) - (χ^{(i,0)}, o)]."""
        result: List[Tuple[float, Cell]] = []
        for axis in range(self.grade):
            sign = 1.0 if axis % 2 == 0 else -1.0
            result.append((sign, self.face(axis, 1.0)))
            result.append((-sign, self.face(axis, 0.0)))
        return result

    def integrate(self, form: SmoothForm, order: Optional[int] = None) -> float:
        """∫_{(χ,o)} A = ∫_{[0,1]^q} A(χ(s))(D_1χ(s), …, D_qχ(s), o) ds."""
        if form.grade != self.grade:
            raise GradeMismatchError(f"integrating a {form.grade}-form over a {self.grade}-cell")
        if form.space.dim != self.space.dim:
            raise DimensionMismatchError(self.space.dim, form.space.dim)
        nodes, weights = unit_cube_rule(order or get_settings().quad_order, self.grade)
        coefficients = form.coefficients(self.at(nodes))
        volumes = minors(self.tangent_vectors(nodes), self.grade)
        factor = 1.0 if form.parity is Parity.EVEN else float(self.orientation.sign)
        return factor * float(weights @ np.sum(coefficients * volumes, axis=1))


def integrate_cell(form: SmoothForm, cell: Cell, order: Optional[int] = None) -> float:
    return cell.integrate(form, order)


@dataclass(frozen=True)
class Chain:
    """A formal combination Σ w_k (χ_k, o_k) of q-cells of one parity."""

    grade: int
    parity: Parity
    terms: Tuple[Tuple[float, Cell], ...] = ()

    @classmethod
    def of(cls, cell: Cell, parity: Parity = Parity.EVEN, weight: float = 1.0) -> "Chain":
        return cls(cell.grade, parity, ((float(weight), cell),))

    def integrate(self, form: SmoothForm, order: Optional[int] = None) -> float:
        if not self.terms:
            return 0.0
        if form.grade != self.grade:
            raise GradeMismatchError(f"integrating a {form.grade}-form over a {self.grade}-chain")
        return float(sum(weight * cell.integrate(form, order) for weight, cell in self.terms))

    def boundary(self) -> "Chain":
        if self.grade <= 0:
            return Chain(self.grade - 1, self.parity, ())
        terms = tuple((weight * sign, face) for weight, cell in self.terms for sign, face in cell.faces())
        return Chain(self.grade - 1, self.parity, terms)

    def __add__(self, other: "Chain") -> "Chain":
        if other.grade != self.grade:
            raise GradeMismatchError(f"adding a {self.grade}-chain and a {other.grade}-chain")
        if other.parity is not self.parity:
            raise ParityMismatchError("adding chains of different parity")
        return Chain(self.grade, self.parity, self.terms + other.terms)

    def __neg__(self) -> "Chain":
        return self.scaled(-1.0)

    def scaled(self, factor: float) -> "Chain":
        return Chain(self.grade, self.parity, tuple((factor * weight, cell) for weight, cell in self.terms))


def boundary_chain(chain: Chain) -> Chain:
    return chain.boundary()


def stokes_residual(form: SmoothForm, chain: Chain, order: Optional[int] = None) -> float:
    """|∫_C dA - ∫_{∂C} A|."""
    if form.grade != chain.grade - 1:
        raise GradeMismatchError(f"a {form.grade}-form against a {chain.grade}-chain")
    if form.parity is not chain.parity:
        raise ParityMismatchError(f"{form.parity.value} form on an {chain.parity.value} chain")
    return abs(chain.integrate(form.exterior_derivative(), order) - chain.boundary().integrate(form, order))


# Currents -----------------------------------------------------------------------------------


class Current(ABC):
    """An odd m-dimensional current: a functional on odd m-forms with compact support."""

    def __init__(self, space: SpaceDescriptor):
        self.space = space

    @property
    def dimension(self) -> int:
        return self.space.dim

    @abstractmethod
    def support(self) -> Tuple[np.ndarray, np.ndarray]:
        """A closed box containing the support."""

    @abstractmethod
    def key(self) -> tuple:
        ...

    @abstractmethod
    def _integrate(self, form: SmoothForm) -> float:
        ...

    @abstractmethod
    def _integrate_boundary(self, form: SmoothForm) -> float:
        ...

    def same_as(self, other: "Current") -> bool:
        return self.key() == other.key()

    def _check_form(self, form: SmoothForm, grade: int) -> None:
        if form.space.dim != self.space.dim:
            raise DimensionMismatchError(self.space.dim, form.space.dim)
        if form.grade != grade:
            raise DegreeMismatchError(f"expected a {grade}-form, got a {form.grade}-form")
        if form.parity is not Parity.ODD:
            raise DegreeMismatchError("currents integrate odd forms only")
        check_support(form, self)

    def integrate(self, form: SmoothForm) -> float:
        """∫_c A for an odd m-form A."""
        self._check_form(form, self.dimension)
        return self._integrate(form)

    def integrate_boundary(self, form: SmoothForm) -> float:
        """∫_{∂c} A = ∫_c dA for an odd (m-1)-form A."""
        self._check_form(form, self.dimension - 1)
        return self._integrate_boundary(form)


def check_support(form: SmoothForm, current: Current) -> None:
    if form.domain is None:
        return
    lower, upper = current.support()
    if not form.domain.contains_box(lower, upper):
        logger.debug(f"support [{lower}, {upper}] not inside the domain of {form.name or 'form'}")
        raise SupportViolationError(f"support [{list(lower)}, {list(upper)}] is not inside the form's domain")


class ChainCurrent(Current):
    """Integration over an odd chain of m-cells."""

    def __init__(self, chain: Chain, order: Optional[int] = None):
        if chain.parity is not Parity.ODD:
            raise ParityMismatchError("a chain-backed current needs an odd chain")
        if not chain.terms:
            raise DegreeMismatchError("a chain-backed current needs at least one cell")
        if chain.grade != chain.terms[0][1].space.dim:
            raise DegreeMismatchError(f"a chain-backed current needs top-dimensional cells, got grade {chain.grade}")
        super().__init__(chain.terms[0][1].space)
        self.chain = chain
        self.order = order

    def support(self) -> Tuple[np.ndarray, np.ndarray]:
        nodes, _ = unit_cube_rule(self.order or get_settings().quad_order, self.chain.grade)
        corners = np.array(np.meshgrid(*([[0.0, 1.0]] * self.chain.grade), indexing="ij")).reshape(self.chain.grade, -1).T
        samples = np.concatenate([np.concatenate([cell.at(nodes), cell.at(corners)]) for _, cell in self.chain.terms])
        return samples.min(axis=0), samples.max(axis=0)

    def key(self) -> tuple:
        return ("chain", id(self.chain))

    def _integrate(self, form: SmoothForm) -> float:
        return self.chain.integrate(form, self.order)

    def _integrate_boundary(self, form: SmoothForm) -> float:
        return self.chain.boundary().integrate(form, self.order)


class CubeDomain(Current):
    """An axis-aligned compact box K, integrated as the single odd cell parameterizing it."""

    def __init__(self, lower: Sequence[float], upper: Sequence[float], order: Optional[int] = None, space: Optional[SpaceDescriptor] = None):
        lower = np.asarray(lower, dtype=float)
        upper = np.asarray(upper, dtype=float)
        if lower.shape != upper.shape:
            raise ShapeMismatchError(lower.shape, upper.shape)
        if np.any(lower >= upper):
            raise ValueError("cube domain needs min < max on every axis")
        super().__init__(space or SpaceDescriptor(lower.size, first_label=0))
        self.lower = lower
        self.upper = upper
        self.order = order

    @classmethod
    def from_spec(
        cls, spec: CubeDomainSpec, order: Optional[int] = None, space: Optional[SpaceDescriptor] = None
    ) -> "CubeDomain":
        return cls(spec.min, spec.max, order, space)

    @property
    def cell(self) -> Cell:
        return Cell.affine(self.space, self.lower, np.diag(self.upper - self.lower))

    @property
    def chain(self) -> Chain:
        return Chain.of(self.cell, Parity.ODD)

    def faces(self) -> Chain:
        return self.chain.boundary()

    def support(self) -> Tuple[np.ndarray, np.ndarray]:
        return self.lower, self.upper

    def key(self) -> tuple:
        return ("cube", tuple(self.lower), tuple(self.upper))

    def _integrate(self, form: SmoothForm) -> float:
        return self.cell.integrate(form, self.order)

    def _integrate_boundary(self, form: SmoothForm) -> float:
        return self.faces().integrate(form, self.order)

    def interior_points(self, per_axis: int = 3) -> np.ndarray:
        """A deterministic lattice of interior points."""
        axes = [np.linspace(low, high, per_axis + 2)[1:-1] for low, high in zip(self.lower, self.upper)]
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, self.lower.size)

    def face_points(self, per_axis: int = 3) -> np.ndarray:
        """A deterministic lattice on every face of ∂K."""
        points = []
        for axis in range(self.lower.size):
            for value in (self.lower[axis], self.upper[axis]):
                axes = [
                    np.array([value]) if j == axis else np.linspace(low, high, per_axis)
                    for j, (low, high) in enumerate(zip(self.lower, self.upper))
                ]
                points.append(np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, self.lower.size))
        return np.concatenate(points)


class DiracCurrent(Current):
    """wδ(x): A ↦ ⟨Ã(x), w⟩ for an odd m-vector w."""

    def __init__(self, point: Sequence[float], w: GradedElement):
        if w.kind is not Kind.VECTOR or w.parity is not Parity.ODD or w.grade != w.dim:
            raise DegreeMismatchError("a Dirac current needs an odd top-grade vector w")
        super().__init__(w.space)
        self.point = as_points(point, w.dim)[0]
        self.w = w

    @classmethod
    def from_spec(cls, spec: DiracSpec) -> "DiracCurrent":
        return cls(spec.point, GradedElement.from_json(spec.w.model_dump()))

    def support(self) -> Tuple[np.ndarray, np.ndarray]:
        return self.point, self.point

    def key(self) -> tuple:
        return ("dirac", tuple(self.point), tuple(self.w.coefficients))

    @property
    def is_degenerate(self) -> bool:
        return self.w.is_zero()

    def _integrate(self, form: SmoothForm) -> float:
        return pair(form.at(self.point), self.w)

    def _integrate_boundary(self, form: SmoothForm) -> float:
        return pair(form.exterior_derivative().at(self.point), self.w)


def integrate_current(form: SmoothForm, current: Current) -> float:
    return current.integrate(form)
