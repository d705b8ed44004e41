"""
Quadratic densities κ on the first jet space and the functions k they induce on fields
(A, c): evaluation, polarization, derivatives, and the pairing of the covector (G, J, c)
with a displacement δA.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Literal, Optional, Sequence, Tuple

import numpy as np

from oddforms.core.config import get_settings
from oddforms.core.exceptions import (
    CurrentMismatchError,
    GradeMismatchError,
    InputValidationError,
    ParityMismatchError,
    ShapeMismatchError,
)
from oddforms.core.logger import setup_logger
from oddforms.models.schemas import QuadraticDensitySpec
from oddforms.services.affine_forms import (
    Current,
    SmoothForm,
    check_support,
    exterior_derivative,
    wedge_forms,
)
from oddforms.services.exterior_algebra import GradedElement, Kind, Parity, SpaceDescriptor
from oddforms.services.fields import (
    CoefficientField,
    ConstantField,
    LinearMapField,
    PointwiseLinearField,
    SumField,
)
from oddforms.services.weyl import BilinearForm, weyl_matrix

logger = setup_logger(__name__)

PairingRoute = Literal["stokes", "direct", "expanded"]


def transpose_matrix(rows: int, columns: int) -> np.ndarray:
    """Permutation taking a row-major (rows × columns) matrix to its row-major transpose."""
    permutation = np.zeros((rows * columns, rows * columns))
    for row in range(rows):
        for column in range(columns):
            permutation[column * rows + row, row * columns + column] = 1.0
    return permutation


@dataclass(frozen=True, eq=False)
class QuadraticDensity:
    """
    κ_x(a, f) = ½λ_x(a, a) + μ_x(a, f) + ½ν_x(f, f) (+ an optional constant odd m-form
    part, used by the probes that separate currents).

    Each block is a field holding the row-major coefficient tensor of a bilinear map into
    odd m-covectors.
    """

    space: SpaceDescriptor
    lam: CoefficientField
    mu: CoefficientField
    nu: CoefficientField
    top: Optional[CoefficientField] = None

    def __post_init__(self):
        n1, n2 = self.sizes
        for block, size in ((self.lam, n1 * n1), (self.mu, n1 * n2), (self.nu, n2 * n2)):
            if block.size != size:
                raise ShapeMismatchError((size,), (block.size,))
        if self.top is not None and self.top.size != 1:
            raise ShapeMismatchError((1,), (self.top.size,))

    @property
    def sizes(self) -> Tuple[int, int]:
        return self.space.size(1), self.space.size(2)

    @classmethod
    def constant(
        cls,
        space: SpaceDescriptor,
        lam: np.ndarray,
        mu: np.ndarray,
        nu: np.ndarray,
        top: float = 0.0,
    ) -> "QuadraticDensity":
        lam, mu, nu = (np.asarray(block, dtype=float) for block in (lam, mu, nu))
        n1, n2 = space.size(1), space.size(2)
        for block, shape in ((lam, (n1, n1)), (mu, (n1, n2)), (nu, (n2, n2))):
            if block.shape != shape:
                raise ShapeMismatchError(shape, block.shape)
        for name, block in (("lambda", lam), ("nu", nu)):
            if not np.allclose(block, block.T, rtol=0.0, atol=1e-12):
                raise InputValidationError("quadratic density", name, "block must be symmetric")
        return cls(
            space,
            ConstantField(space.dim, lam.reshape(-1)),
            ConstantField(space.dim, mu.reshape(-1)),
            ConstantField(space.dim, nu.reshape(-1)),
            ConstantField(space.dim, [top]) if top else None,
        )

    @classmethod
    def zero(cls, space: SpaceDescriptor) -> "QuadraticDensity":
        n1, n2 = space.size(1), space.size(2)
        return cls.constant(space, np.zeros((n1, n1)), np.zeros((n1, n2)), np.zeros((n2, n2)))

    @classmethod
    def from_spec(cls, spec: QuadraticDensitySpec, space: Optional[SpaceDescriptor] = None) -> "QuadraticDensity":
        space = space or SpaceDescriptor(spec.dim, first_label=0 if spec.dim == 4 else 1)
        return cls.constant(space, spec.lambda_, spec.mu, spec.nu)

    @property
    def is_constant(self) -> bool:
        return all(isinstance(block, ConstantField) for block in (self.lam, self.mu, self.nu))

    def blocks(self, x: Sequence[float]) -> Tuple[BilinearForm, BilinearForm, BilinearForm]:
        n1, n2 = self.sizes
        return (
            BilinearForm(self.space, 1, 1, self.lam(x).reshape(n1, n1)),
            BilinearForm(self.space, 1, 2, self.mu(x).reshape(n1, n2)),
            BilinearForm(self.space, 2, 2, self.nu(x).reshape(n2, n2)),
        )

    def top_at(self, x: Sequence[float]) -> GradedElement:
        value = 0.0 if self.top is None else float(self.top(x)[0])
        return GradedElement(self.space, Kind.COVECTOR, Parity.ODD, self.space.dim, [value])

    def to_spec(self) -> QuadraticDensitySpec:
        if not self.is_constant:
            raise InputValidationError("quadratic density", "dependence", "only constant densities serialize")
        n1, n2 = self.sizes
        origin = np.zeros(self.space.dim)
        return QuadraticDensitySpec(
            **{
                "lambda": self.lam(origin).reshape(n1, n1).tolist(),
                "mu": self.mu(origin).reshape(n1, n2).tolist(),
                "nu": self.nu(origin).reshape(n2, n2).tolist(),
                "dim": self.space.dim,
            }
        )


def _require(element: GradedElement, parity: Parity, grade: int, what: str) -> None:
    if element.kind is not Kind.COVECTOR:
        raise GradeMismatchError(f"{what} must be a covector")
    if element.grade != grade:
        raise GradeMismatchError(f"{what} must have grade {grade}, got {element.grade}")
    if element.parity is not parity:
        raise ParityMismatchError(f"{what} must be {parity.value}")


def eval_kappa(kappa: QuadraticDensity, x: Sequence[float], a: GradedElement, f: GradedElement) -> GradedElement:
    _require(a, Parity.EVEN, 1, "a")
    _require(f, Parity.EVEN, 2, "f")
    lam, mu, nu = kappa.blocks(x)
    return 0.5 * lam(a, a) + mu(a, f) + 0.5 * nu(f, f) + kappa.top_at(x)


def polarization(
    kappa: QuadraticDensity,
    x: Sequence[float],
    first: Tuple[GradedElement, GradedElement],
    second: Tuple[GradedElement, GradedElement],
) -> GradedElement:
    """δ²κ_x((a, f), (a', f')) = λ(a, a') + μ(a, f') + μ(a', f) + ν(f, f')."""
    (a, f), (a_prime, f_prime) = first, second
    lam, mu, nu = kappa.blocks(x)
    return lam(a, a_prime) + mu(a, f_prime) + mu(a_prime, f) + nu(f, f_prime)


def kappa_derivative(
    kappa: QuadraticDensity,
    x: Sequence[float],
    a: GradedElement,
    f: GradedElement,
    delta_a: GradedElement,
    delta_f: GradedElement,
) -> GradedElement:
    """Dκ_x(a, f)(δa, δf) = λ(a, δa) + μ(a, δf) + μ(δa, f) + ν(f, δf)."""
    return polarization(kappa, x, (a, f), (delta_a, delta_f))


def bilinear_derivative(
    b: BilinearForm,
    left: GradedElement,
    right: GradedElement,
    delta_left: GradedElement,
    delta_right: GradedElement,
) -> GradedElement:
    """Db(a, f)(δa, δf) = b(a, δf) + b(δa, f)."""
    return b(left, delta_right) + b(delta_left, right)


class DensityField(CoefficientField):
    """x ↦ κ(x, A(x), dA(x)) as the single coefficient of an odd m-form."""

    def __init__(self, kappa: QuadraticDensity, potential: CoefficientField, field_strength: CoefficientField):
        super().__init__(potential.dim, 1)
        self.kappa = kappa
        self.potential = potential
        self.field_strength = field_strength

    def _evaluate(self, points: np.ndarray) -> np.ndarray:
        n = points.shape[0]
        n1, n2 = self.kappa.sizes
        a = self.potential.values(points)
        f = self.field_strength.values(points)
        lam = self.kappa.lam.values(points).reshape(n, n1, n1)
        mu = self.kappa.mu.values(points).reshape(n, n1, n2)
        nu = self.kappa.nu.values(points).reshape(n, n2, n2)
        value = (
            0.5 * np.einsum("nij,ni,nj->n", lam, a, a)
            + np.einsum("nij,ni,nj->n", mu, a, f)
            + 0.5 * np.einsum("nij,ni,nj->n", nu, f, f)
        )
        if self.kappa.top is not None:
            value = value + self.kappa.top.values(points)[:, 0]
        return value.reshape(n, 1)


def density_form(kappa: QuadraticDensity, potential: SmoothForm) -> SmoothForm:
    """κ ∘ (x, A, dA) as an odd m-form."""
    field = DensityField(kappa, potential.field, exterior_derivative(potential).field)
    return SmoothForm(potential.space, Parity.ODD, potential.space.dim, field, potential.domain, "kappa")


def _apply_block(block: CoefficientField, rows: int, columns: int, inner: CoefficientField, transposed: bool) -> CoefficientField:
    """x ↦ B(x) v(x), or Bᵀ(x) v(x), for a row-major (rows × columns) block."""
    if isinstance(block, ConstantField):
        matrix = block.value.reshape(rows, columns)
        return LinearMapField(matrix.T if transposed else matrix, inner)
    if transposed:
        return PointwiseLinearField(LinearMapField(transpose_matrix(rows, columns), block), inner, columns)
    return PointwiseLinearField(block, inner, rows)


def conjugate_forms(kappa: QuadraticDensity, potential: SmoothForm) -> Tuple[SmoothForm, SmoothForm]:
    """
    X = We₁(λ̄(A) + μ̿(dA)), an odd (m-1)-form, and Y = We₂(μ̄(A) + ν̄(dA)), an odd
    (m-2)-form, so that Dκ(δA, dδA) = -X∧δA + Y∧dδA.
    """
    space = potential.space
    m = space.dim
    n1, n2 = kappa.sizes
    a = potential.field
    f = exterior_derivative(potential).field
    first = SumField([(1.0, _apply_block(kappa.lam, n1, n1, a, True)), (1.0, _apply_block(kappa.mu, n1, n2, f, False))])
    second = SumField([(1.0, _apply_block(kappa.mu, n1, n2, a, True)), (1.0, _apply_block(kappa.nu, n2, n2, f, True))])
    x_form = SmoothForm(space, Parity.ODD, m - 1, LinearMapField(weyl_matrix(m, 1), first), potential.domain, "X")
    y_form = SmoothForm(space, Parity.ODD, m - 2, LinearMapField(weyl_matrix(m, 2), second), potential.domain, "Y")
    return x_form, y_form


@dataclass(frozen=True, eq=False)
class FieldRep:
    """q(A, c): an even 1-form A on a domain containing the support of c."""

    A: SmoothForm
    current: Current

    def __post_init__(self):
        if self.A.grade != 1:
            raise GradeMismatchError(f"the potential must be a 1-form, got grade {self.A.grade}")
        if self.A.parity is not Parity.EVEN:
            raise ParityMismatchError("the potential must be even")
        check_support(self.A, self.current)


@dataclass(frozen=True, eq=False)
class CovectorRep:
    """p(G, J, c): induction G (odd 2-form) and source J (odd 3-form) on the current c."""

    G: SmoothForm
    J: SmoothForm
    current: Current
    c_light: Optional[float] = None

    def __post_init__(self):
        m = self.current.dimension
        for name, form, grade in (("G", self.G, m - 2), ("J", self.J, m - 1)):
            if form.grade != grade:
                raise GradeMismatchError(f"{name} must have grade {grade}, got {form.grade}")
            if form.parity is not Parity.ODD:
                raise ParityMismatchError(f"{name} must be odd")
        if self.c_light is None:
            object.__setattr__(self, "c_light", get_settings().c_light)


@dataclass(frozen=True, eq=False)
class Phase:
    """A point of the phase space: a field and a covector on the same current."""

    field: FieldRep
    covector: CovectorRep

    def __post_init__(self):
        if not self.field.current.same_as(self.covector.current):
            raise CurrentMismatchError("the field and the covector live on different currents")


def k_eval(kappa: QuadraticDensity, q: FieldRep) -> float:
    """k(q(A, c)) = ∫_c κ ∘ (x, A, dA)."""
    return q.current.integrate(density_form(kappa, q.A))


def Dk_analytic(kappa: QuadraticDensity, A: SmoothForm, delta_A: SmoothForm, current: Current) -> float:
    """-∫_c (X + dY)∧δA + ∫_{∂c} Y∧δA."""
    check_support(delta_A, current)
    x_form, y_form = conjugate_forms(kappa, A)
    bulk = wedge_forms(x_form + exterior_derivative(y_form), delta_A)
    return -current.integrate(bulk) + current.integrate_boundary(wedge_forms(y_form, delta_A))


def Dk_fd(
    kappa: QuadraticDensity,
    A: SmoothForm,
    delta_A: SmoothForm,
    current: Current,
    step: Optional[float] = None,
) -> float:
    """Central difference of s ↦ k(q(A + sδA, c)) at 0; exact for quadratic κ."""
    step = float(step if step is not None else get_settings().variation_step)
    forward = k_eval(kappa, FieldRep(A + step * delta_A, current))
    backward = k_eval(kappa, FieldRep(A - step * delta_A, current))
    return (forward - backward) / (2.0 * step)


def Dk_pointwise(kappa: QuadraticDensity, A: SmoothForm, delta_A: SmoothForm, x: Sequence[float]) -> GradedElement:
    """Dκ_x(A(x), dA(x))(δA(x), dδA(x)) evaluated directly from the blocks."""
    return kappa_derivative(
        kappa,
        x,
        A.at(x),
        exterior_derivative(A).at(x),
        delta_A.at(x),
        exterior_derivative(delta_A).at(x),
    )


def covector_pairing(
    p: CovectorRep,
    delta_A: SmoothForm,
    current: Optional[Current] = None,
    route: PairingRoute = "stokes",
) -> float:
    """
    ⟨p, δq⟩_c = ∫_c (1/c² J∧δA - 1/(4πc) d(G∧δA)).

    route "stokes" integrates G∧δA over ∂c, "direct" integrates d(G∧δA) over c and
    "expanded" integrates -(1/4πc)[(dG - (4π/c)J)∧δA + G∧dδA] over c.
    """
    current = current or p.current
    if not current.same_as(p.current):
        raise CurrentMismatchError("the covector is paired on a different current")
    if delta_A.grade != 1 or delta_A.parity is not Parity.EVEN:
        raise GradeMismatchError("δA must be an even 1-form")
    c_light = p.c_light
    if route == "expanded":
        residual = exterior_derivative(p.G) - (4.0 * np.pi / c_light) * p.J
        integrand = wedge_forms(residual, delta_A) + wedge_forms(p.G, exterior_derivative(delta_A))
        return -current.integrate(integrand) / (4.0 * np.pi * c_light)
    source = current.integrate(wedge_forms(p.J, delta_A)) / c_light**2
    if route == "stokes":
        exact = current.integrate_boundary(wedge_forms(p.G, delta_A))
    elif route == "direct":
        exact = current.integrate(exterior_derivative(wedge_forms(p.G, delta_A)))
    else:
        raise InputValidationError("covector_pairing", "route", f"unknown route '{route}'")
    return source - exact / (4.0 * np.pi * c_light)


def probe_family(space: SpaceDescriptor) -> List[QuadraticDensity]:
    """
    Constant-coefficient basis densities (symmetric λ and ν, all μ) plus the constant odd
    m-form probe. Finite surrogate for quantifying over all quadratic κ.
    """
    n1, n2 = space.size(1), space.size(2)
    probes: List[QuadraticDensity] = [
        QuadraticDensity.constant(space, np.zeros((n1, n1)), np.zeros((n1, n2)), np.zeros((n2, n2)), top=1.0)
    ]
    for i in range(n1):
        for j in range(i, n1):
            lam = np.zeros((n1, n1))
            lam[i, j] = lam[j, i] = 1.0
            probes.append(QuadraticDensity.constant(space, lam, np.zeros((n1, n2)), np.zeros((n2, n2))))
    for i in range(n1):
        for j in range(n2):
            mu = np.zeros((n1, n2))
            mu[i, j] = 1.0
            probes.append(QuadraticDensity.constant(space, np.zeros((n1, n1)), mu, np.zeros((n2, n2))))
    for i in range(n2):
        for j in range(i, n2):
            nu = np.zeros((n2, n2))
            nu[i, j] = nu[j, i] = 1.0
            probes.append(QuadraticDensity.constant(space, np.zeros((n1, n1)), np.zeros((n1, n2)), nu))
    return probes


def fields_equivalent(
    first: FieldRep,
    second: FieldRep,
    probes: Optional[Sequence[QuadraticDensity]] = None,
    tol: Optional[float] = None,
) -> bool:
    """True when every probe density gives the same k on both fields."""
    probes = probes if probes is not None else probe_family(first.A.space)
    tol = tol if tol is not None else get_settings().tol_quad
    for probe in probes:
        if abs(k_eval(probe, first) - k_eval(probe, second)) > tol:
            return False
    return True
