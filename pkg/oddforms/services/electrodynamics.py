"""
Vacuum electrodynamics on Minkowski space: the Lagrangian density and action, the virtual
action principle and its compact-domain and infinitesimal forms, the constitutive relation,
Maxwell's equations, the energy density, the Legendre transformation and the Hamiltonian
description.
"""

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from oddforms.core.config import Settings, get_settings
from oddforms.core.exceptions import (
    ConfigurationError,
    DegenerateCurrentError,
    DomainViolationError,
    FamilyError,
    GradeMismatchError,
    KindMismatchError,
    ParityMismatchError,
)
from oddforms.core.logger import setup_logger
from oddforms.models.schemas import FieldFamilySpec, PointVerdict, TrajectorySpec, VerdictRecord
from oddforms.services.affine_forms import (
    CubeDomain,
    Current,
    Region,
    SmoothForm,
    apply_linear,
    exterior_derivative,
    intersect,
    wedge_forms,
)
from oddforms.services.exterior_algebra import (
    GradedElement,
    Kind,
    Parity,
    SpaceDescriptor,
    basis_tuples,
    interior_left,
    interior_right,
    pair,
    volume_covector,
    volume_vector,
    wedge,
    wedge_table,
)
from oddforms.services.families import build_family, constant_form, random_polynomial_form, zero_form
from oddforms.services.variational import (
    CovectorRep,
    FieldRep,
    QuadraticDensity,
    covector_pairing,
    k_eval,
)
from oddforms.services.weyl import weyl_matrix

logger = setup_logger(__name__)


def induced_bivector_matrix(matrix: np.ndarray) -> np.ndarray:
    """∧²T on increasing pairs: [J=(μ,ν), I=(α,β)] = T^{μα}T^{νβ} - T^{μβ}T^{να}."""
    pairs = basis_tuples(matrix.shape[0], 2)
    result = np.zeros((len(pairs), len(pairs)))
    for row, (mu, nu) in enumerate(pairs):
        for column, (alpha, beta) in enumerate(pairs):
            result[row, column] = matrix[mu, alpha] * matrix[nu, beta] - matrix[mu, beta] * matrix[nu, alpha]
    return result


@dataclass(frozen=True, eq=False)
class MinkowskiStructure:
    """The metric g of signature (1, m-1), its induced maps and volume elements, and c."""

    metric: np.ndarray
    c_light: float = 1.0

    def __post_init__(self):
        metric = np.array(self.metric, dtype=float)
        if metric.ndim != 2 or metric.shape[0] != metric.shape[1]:
            raise ConfigurationError(f"metric must be a square matrix, got shape {metric.shape}")
        if not np.allclose(metric, metric.T, rtol=0.0, atol=0.0):
            raise ConfigurationError("metric must be symmetric")
        eigenvalues = np.linalg.eigvalsh(metric)
        if np.any(eigenvalues == 0.0) or int(np.sum(eigenvalues > 0)) != 1:
            raise ConfigurationError(f"metric must be non-degenerate of signature (1, {metric.shape[0] - 1})")
        if self.c_light <= 0:
            raise ConfigurationError("c_light must be positive")
        metric.setflags(write=False)
        object.__setattr__(self, "metric", metric)

    @classmethod
    def from_settings(cls, settings: Optional[Settings] = None) -> "MinkowskiStructure":
        settings = settings or get_settings()
        return cls(np.diag(settings.metric), settings.c_light)

    def with_c_light(self, c_light: float) -> "MinkowskiStructure":
        return MinkowskiStructure(self.metric, c_light)

    @cached_property
    def space(self) -> SpaceDescriptor:
        return SpaceDescriptor(self.metric.shape[0], first_label=0)

    @cached_property
    def inverse(self) -> np.ndarray:
        return np.linalg.inv(self.metric)

    @cached_property
    def volume_factor(self) -> float:
        return float(np.sqrt(abs(np.linalg.det(self.metric))))

    @cached_property
    def sqrt_g(self) -> GradedElement:
        """The odd m-covector √|g|."""
        return self.volume_factor * volume_covector(self.space)

    @cached_property
    def sqrt_g_inverse(self) -> GradedElement:
        """The odd m-vector √|g⁻¹| with ⟨√|g|, √|g⁻¹|⟩ = 1."""
        return volume_vector(self.space) / self.volume_factor

    @cached_property
    def wedge2_inverse_matrix(self) -> np.ndarray:
        return induced_bivector_matrix(self.inverse)

    @cached_property
    def wedge2_matrix(self) -> np.ndarray:
        return induced_bivector_matrix(self.metric)

    @cached_property
    def constitutive_matrix(self) -> np.ndarray:
        """Λ with G = Λ F."""
        return self.volume_factor * weyl_matrix(self.space.dim, 2) @ self.wedge2_inverse_matrix

    @cached_property
    def constitutive_inverse_matrix(self) -> np.ndarray:
        """Λ⁻¹ with F = Λ⁻¹ G, from g ↦ ∧²g(√|g⁻¹| ⌞ g)."""
        m = self.space.dim
        contraction = wedge_table(m, m - 2, 2)[0] / self.volume_factor
        return self.wedge2_matrix @ contraction

    def wedge2_inverse(self, f: GradedElement) -> GradedElement:
        """∧²g⁻¹: even 2-covectors → even 2-vectors."""
        return GradedElement(self.space, Kind.VECTOR, f.parity, 2, self.wedge2_inverse_matrix @ f.coefficients)

    def wedge2(self, w: GradedElement) -> GradedElement:
        """∧²g: 2-vectors → 2-covectors."""
        return GradedElement(self.space, Kind.COVECTOR, w.parity, 2, self.wedge2_matrix @ w.coefficients)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """A phase space trajectory (A, G, J) on a common domain."""

    A: SmoothForm
    G: SmoothForm
    J: SmoothForm
    name: str = ""

    def __post_init__(self):
        m = self.A.space.dim
        for label, form, parity, grade in (
            ("A", self.A, Parity.EVEN, 1),
            ("G", self.G, Parity.ODD, m - 2),
            ("J", self.J, Parity.ODD, m - 1),
        ):
            if form.grade != grade:
                raise GradeMismatchError(f"{label} must have grade {grade}, got {form.grade}")
            if form.parity is not parity:
                raise ParityMismatchError(f"{label} must be {parity.value}")

    @property
    def domain(self) -> Optional[Region]:
        return intersect(intersect(self.A.domain, self.G.domain), self.J.domain)

    @property
    def F(self) -> SmoothForm:
        return exterior_derivative(self.A)


def _require_covector(element: GradedElement, parity: Parity, grade: int, what: str) -> None:
    if element.kind is not Kind.COVECTOR:
        raise KindMismatchError(f"{what} must be a covector")
    if element.grade != grade:
        raise GradeMismatchError(f"{what} must have grade {grade}, got {element.grade}")
    if element.parity is not parity:
        raise ParityMismatchError(f"{what} must be {parity.value}")


@dataclass(frozen=True, eq=False)
class PhaseDelta:
    """(a, f, g, r): a point of the infinitesimal phase space."""

    a: GradedElement
    f: GradedElement
    g: GradedElement
    r: GradedElement

    def __post_init__(self):
        m = self.a.dim
        _require_covector(self.a, Parity.EVEN, 1, "a")
        _require_covector(self.f, Parity.EVEN, 2, "f")
        _require_covector(self.g, Parity.ODD, m - 2, "g")
        _require_covector(self.r, Parity.ODD, m - 1, "r")

    @classmethod
    def from_trajectory(cls, trajectory: Trajectory, x: Sequence[float], structure: MinkowskiStructure) -> "PhaseDelta":
        """(A(x), F(x), G(x), dG(x) - (4π/c)J(x))."""
        r = exterior_derivative(trajectory.G).at(x) - (4.0 * np.pi / structure.c_light) * trajectory.J.at(x)
        return cls(trajectory.A.at(x), trajectory.F.at(x), trajectory.G.at(x), r)


def sup_norm(form: SmoothForm, points: np.ndarray) -> float:
    values = form.coefficients(points)
    return float(np.max(np.abs(values))) if values.size else 0.0


class ElectrodynamicsService:
    """Field equations, verdicts and the Legendre/Hamiltonian side of vacuum electrodynamics"""

    def __init__(self, structure: Optional[MinkowskiStructure] = None, settings: Optional[Settings] = None):
        self.settings = settings or get_settings()
        self.structure = structure or MinkowskiStructure.from_settings(self.settings)

    @property
    def space(self) -> SpaceDescriptor:
        return self.structure.space

    @property
    def c_light(self) -> float:
        return self.structure.c_light

    def _basis(self, kind: Kind, parity: Parity, grade: int) -> List[GradedElement]:
        size = self.space.size(grade)
        return [GradedElement(self.space, kind, parity, grade, row) for row in np.eye(size)]

    # -- Lagrangian side ---------------------------------------------------------------------------

    def lagrangian_kernel(self) -> QuadraticDensity:
        """λ = μ = 0 and ν = -(1/4πc)⟨·, ∧²g⁻¹ ·⟩√|g|, so that L(a, f) = ½ν(f, f)."""
        n1, n2 = self.space.size(1), self.space.size(2)
        nu = -self.structure.wedge2_inverse_matrix * self.structure.volume_factor / (4.0 * np.pi * self.c_light)
        return QuadraticDensity.constant(self.space, np.zeros((n1, n1)), np.zeros((n1, n2)), nu)

    def lagrangian_density(self, f: GradedElement, a: Optional[GradedElement] = None) -> GradedElement:
        """L(a, f) = -(1/8πc)⟨f, ∧²g⁻¹(f)⟩√|g|; the 1-covector slot is ignored."""
        _require_covector(f, Parity.EVEN, 2, "f")
        value = pair(f, self.structure.wedge2_inverse(f))
        return (-value / (8.0 * np.pi * self.c_light)) * self.structure.sqrt_g

    def lagrangian_derivative(
        self, a: GradedElement, f: GradedElement, delta_a: GradedElement, delta_f: GradedElement
    ) -> GradedElement:
        """DL(a, f)(δa, δf) = -(1/4πc) δf ∧ Λf."""
        return (-1.0 / (4.0 * np.pi * self.c_light)) * wedge(delta_f, self.constitutive(f))

    def action(self, A: SmoothForm, current: Current) -> float:
        """W(q(A, c)) = ∫_c L ∘ (x, A, dA)."""
        return k_eval(self.lagrangian_kernel(), FieldRep(A, current))

    def action_variation(self, A: SmoothForm, delta_A: SmoothForm, current: Current) -> float:
        """⟨dW(q), δq⟩ = -(1/4πc) ∫_c (Λ dA) ∧ dδA."""
        FieldRep(A, current)
        integrand = wedge_forms(self.constitutive_form(exterior_derivative(A)), exterior_derivative(delta_A))
        return -current.integrate(integrand) / (4.0 * np.pi * self.c_light)

    # -- constitutive relation and its inverse --------------------------------------------------------

    def constitutive(self, F: GradedElement) -> GradedElement:
        """G = (∧²g⁻¹ F) ⌟ √|g|."""
        _require_covector(F, Parity.EVEN, 2, "F")
        return interior_left(self.structure.wedge2_inverse(F), self.structure.sqrt_g)

    def constitutive_inverse(self, G: GradedElement) -> GradedElement:
        """F = ∧²g(√|g⁻¹| ⌞ G)."""
        _require_covector(G, Parity.ODD, self.space.dim - 2, "G")
        return self.structure.wedge2(interior_right(self.structure.sqrt_g_inverse, G))

    def legendre(self, lam: GradedElement, a: Optional[GradedElement] = None) -> GradedElement:
        """Λ(a, λ) = ∧²g⁻¹(λ) ⌟ √|g|."""
        _require_covector(lam, Parity.EVEN, 2, "λ")
        values = self.structure.constitutive_matrix @ lam.coefficients
        return GradedElement(self.space, Kind.COVECTOR, Parity.ODD, self.space.dim - 2, values)

    def constitutive_form(self, F: SmoothForm) -> SmoothForm:
        return apply_linear(self.structure.constitutive_matrix, F, Parity.ODD, self.space.dim - 2)

    def constitutive_inverse_form(self, G: SmoothForm) -> SmoothForm:
        return apply_linear(self.structure.constitutive_inverse_matrix, G, Parity.EVEN, 2)

    # -- field equations -------------------------------------------------------------------------------

    def euler_lagrange_residual(self, A: SmoothForm, J: SmoothForm) -> SmoothForm:
        """d((∧²g⁻¹ ∘ dA) ⌟ √|g|) - (4π/c) J."""
        F = exterior_derivative(A, require_analytic=True)
        G = self.constitutive_form(F)
        return exterior_derivative(G, require_analytic=True) - (4.0 * np.pi / self.c_light) * J

    def maxwell_residual(self, G: SmoothForm, J: SmoothForm) -> SmoothForm:
        """dG - (4π/c) J."""
        return exterior_derivative(G, require_analytic=True) - (4.0 * np.pi / self.c_light) * J

    def virtual_action_residual(
        self, trajectory: Trajectory, delta_A: SmoothForm, current: Current, route: str = "stokes"
    ) -> float:
        """⟨dW(q), δq⟩ - ⟨p, δq⟩_c."""
        covector = CovectorRep(trajectory.G, trajectory.J, current, self.c_light)
        return self.action_variation(trajectory.A, delta_A, current) - covector_pairing(covector, delta_A, current, route)

    def integrated_principle_residual(self, trajectory: Trajectory, delta_A: SmoothForm, current: Current) -> float:
        """(1/4πc) ∫_c [(G - Λ dA)∧dδA + (dG - (4π/c)J)∧δA]."""
        mismatch = trajectory.G - self.constitutive_form(trajectory.F)
        source = exterior_derivative(trajectory.G) - (4.0 * np.pi / self.c_light) * trajectory.J
        integrand = wedge_forms(mismatch, exterior_derivative(delta_A)) + wedge_forms(source, delta_A)
        return current.integrate(integrand) / (4.0 * np.pi * self.c_light)

    def probe_displacements(self, count: int, rng: np.random.Generator) -> List[SmoothForm]:
        """The linear displacements x_μ e^ν followed by `count` random quadratic ones."""
        m = self.space.dim
        probes = []
        for mu in range(m):
            for nu in range(m):
                powers = [0] * m
                powers[mu] = 1
                terms = [{"component": self.space.format_tuple((nu,)), "coeff": 1.0, "powers": powers}]
                probes.append(build_family(FieldFamilySpec(family="polynomial", params={"terms": terms}), self.space))
        probes.extend(random_polynomial_form(rng, self.space, Parity.EVEN, 1, degree=2) for _ in range(count))
        return probes

    # -- verdicts ----------------------------------------------------------------------------------------

    def compact_domain_check(
        self, trajectory: Trajectory, domain: CubeDomain, per_axis: int = 3, tol: Optional[float] = None
    ) -> VerdictRecord:
        """The Euler-Lagrange equation d(Λ dA) = (4π/c)J inside K and G = Λ dA on ∂K."""
        tol = tol if tol is not None else self.settings.tol_residual
        region = trajectory.domain
        if region is not None and not region.contains_box(domain.lower, domain.upper):
            raise DomainViolationError(f"trajectory {trajectory.name or ''} is not defined on a neighborhood of K")
        interior = sup_norm(self.euler_lagrange_residual(trajectory.A, trajectory.J), domain.interior_points(per_axis))
        mismatch = trajectory.G - self.constitutive_form(trajectory.F)
        boundary = sup_norm(mismatch, domain.face_points(per_axis))
        passed = interior <= tol and boundary <= tol
        if not passed:
            logger.warning(f"compact domain check failed: interior={interior:.3e} boundary={boundary:.3e}")
        return VerdictRecord(interior_residual=interior, boundary_residual=boundary, passed=passed)

    def _check_point(self, trajectory: Trajectory, x: Sequence[float], w: Optional[GradedElement]) -> GradedElement:
        w = w if w is not None else self.structure.sqrt_g_inverse
        if w.is_zero():
            raise DegenerateCurrentError()
        region = trajectory.domain
        if region is not None and not region.contains_point(x):
            raise DomainViolationError(f"point {list(x)} is outside the trajectory's domain")
        return w

    def principle_residual(self, delta: PhaseDelta, w: GradedElement) -> float:
        """max over basis (δa, δf) of |⟨(r∧δa + (g - Λf)∧δf)/(4πc), w⟩|."""
        mismatch = delta.g - self.legendre(delta.f)
        scale = 1.0 / (4.0 * np.pi * self.c_light)
        values = [pair(wedge(delta.r, da), w) * scale for da in self._basis(Kind.COVECTOR, Parity.EVEN, 1)]
        values += [pair(wedge(mismatch, df), w) * scale for df in self._basis(Kind.COVECTOR, Parity.EVEN, 2)]
        return float(max(abs(value) for value in values))

    def infinitesimal_check(
        self, trajectory: Trajectory, x: Sequence[float], w: Optional[GradedElement] = None, tol: Optional[float] = None
    ) -> PointVerdict:
        """G(x) = Λ F(x) and dG(x) = (4π/c) J(x), plus the principle on a basis of (δA(x), δF(x))."""
        tol = tol if tol is not None else self.settings.tol_residual
        w = self._check_point(trajectory, x, w)
        delta = PhaseDelta.from_trajectory(trajectory, x, self.structure)
        constitutive = (delta.g - self.constitutive(delta.f)).norm()
        maxwell = delta.r.norm()
        principle = self.principle_residual(delta, w)
        passed = constitutive <= tol and maxwell <= tol and principle <= tol
        return PointVerdict(
            point=[float(value) for value in x],
            constitutive_residual=constitutive,
            maxwell_residual=maxwell,
            principle_residual=principle,
            passed=passed,
        )

    def hamilton_check(
        self, trajectory: Trajectory, x: Sequence[float], w: Optional[GradedElement] = None, tol: Optional[float] = None
    ) -> PointVerdict:
        """F(x) = ∧²g(√|g⁻¹| ⌞ G(x)) and dG(x) = (4π/c) J(x)."""
        tol = tol if tol is not None else self.settings.tol_residual
        self._check_point(trajectory, x, w)
        delta = PhaseDelta.from_trajectory(trajectory, x, self.structure)
        inverse = (delta.f - self.constitutive_inverse(delta.g)).norm()
        maxwell = delta.r.norm()
        return PointVerdict(
            point=[float(value) for value in x],
            constitutive_residual=inverse,
            maxwell_residual=maxwell,
            passed=inverse <= tol and maxwell <= tol,
        )

    # -- energy, Legendre transformation, Hamiltonian ----------------------------------------------------

    def energy_density(self, a: GradedElement, g: GradedElement, f: GradedElement) -> GradedElement:
        """E(a, g, f) = -(1/4πc) g∧f - L(a, f)."""
        _require_covector(g, Parity.ODD, self.space.dim - 2, "g")
        return (-1.0 / (4.0 * np.pi * self.c_light)) * wedge(g, f) - self.lagrangian_density(f, a)

    def energy_density_forms(self, a: GradedElement, g: GradedElement, f: GradedElement) -> List[GradedElement]:
        """The four equivalent expressions of the energy density."""
        c = self.c_light
        gf = wedge(g, f)
        ginv_f = self.structure.wedge2_inverse(f)
        contracted = interior_left(ginv_f, self.structure.sqrt_g)
        return [
            (-1.0 / (4.0 * np.pi * c)) * gf - self.lagrangian_density(f, a),
            (-1.0 / (4.0 * np.pi * c)) * gf + (pair(f, ginv_f) / (8.0 * np.pi * c)) * self.structure.sqrt_g,
            (-1.0 / (4.0 * np.pi * c)) * gf + (1.0 / (8.0 * np.pi * c)) * wedge(f, contracted),
            (-1.0 / (8.0 * np.pi * c)) * wedge(2.0 * g - contracted, f),
        ]

    def energy_derivative(
        self,
        a: GradedElement,
        g: GradedElement,
        lam: GradedElement,
        delta_a: GradedElement,
        delta_g: GradedElement,
        delta_lam: GradedElement,
    ) -> GradedElement:
        """DE = -(1/4πc)(δg∧λ + (g - Λλ)∧δλ)."""
        return (-1.0 / (4.0 * np.pi * self.c_light)) * (wedge(delta_g, lam) + wedge(g - self.legendre(lam), delta_lam))

    def critical_set_residual(self, a: GradedElement, g: GradedElement, lam: GradedElement) -> float:
        """max over basis δλ of |DE(a, g, λ, 0, 0, δλ)|; zero exactly on the graph of Λ."""
        zero_a = GradedElement.zero(self.space, Kind.COVECTOR, Parity.EVEN, 1)
        zero_g = GradedElement.zero(self.space, Kind.COVECTOR, Parity.ODD, self.space.dim - 2)
        return max(
            self.energy_derivative(a, g, lam, zero_a, zero_g, delta).norm()
            for delta in self._basis(Kind.COVECTOR, Parity.EVEN, 2)
        )

    def section(self, a: GradedElement, g: GradedElement) -> Tuple[GradedElement, GradedElement, GradedElement]:
        """σ(a, g) = (a, g, Λ⁻¹g)."""
        return a, g, self.constitutive_inverse(g)

    def hamiltonian_density(self, a: GradedElement, g: GradedElement) -> GradedElement:
        """H(a, g) = -(1/8πc) g ∧ ∧²g(√|g⁻¹| ⌞ g)."""
        return (-1.0 / (8.0 * np.pi * self.c_light)) * wedge(g, self.constitutive_inverse(g))

    def hamiltonian_derivative(
        self, a: GradedElement, g: GradedElement, delta_a: GradedElement, delta_g: GradedElement
    ) -> GradedElement:
        """DH(a, g)(δa, δg) = -(1/4πc) δg ∧ Λ⁻¹g."""
        return (-1.0 / (4.0 * np.pi * self.c_light)) * wedge(delta_g, self.constitutive_inverse(g))

    # -- infinitesimal dynamics: four descriptions --------------------------------------------------------

    def lagrangian_dynamics_residual(self, delta: PhaseDelta) -> float:
        """∀(δa, δf): DL(a, f)(δa, δf) = -(1/4πc)(r∧δa + g∧δf)."""
        scale = -1.0 / (4.0 * np.pi * self.c_light)
        zero_a = GradedElement.zero(self.space, Kind.COVECTOR, Parity.EVEN, 1)
        zero_f = GradedElement.zero(self.space, Kind.COVECTOR, Parity.EVEN, 2)
        residuals = []
        for da, df in self._displacements(zero_a, zero_f, Parity.EVEN):
            expected = scale * (wedge(delta.r, da) + wedge(delta.g, df))
            residuals.append((self.lagrangian_derivative(delta.a, delta.f, da, df) - expected).norm())
        return max(residuals)

    def hamiltonian_dynamics_residual(self, delta: PhaseDelta) -> float:
        """∀(δa, δg): DH(a, g)(δa, δg) = (1/4πc)(r∧δa - f∧δg)."""
        scale = 1.0 / (4.0 * np.pi * self.c_light)
        zero_a = GradedElement.zero(self.space, Kind.COVECTOR, Parity.EVEN, 1)
        zero_g = GradedElement.zero(self.space, Kind.COVECTOR, Parity.ODD, self.space.dim - 2)
        residuals = []
        for da, dg in self._displacements(zero_a, zero_g, Parity.ODD):
            expected = scale * (wedge(delta.r, da) - wedge(delta.f, dg))
            residuals.append((self.hamiltonian_derivative(delta.a, delta.g, da, dg) - expected).norm())
        return max(residuals)

    def energy_dynamics_residual(self, delta: PhaseDelta) -> Tuple[float, GradedElement]:
        """
        ∃λ ∀(δa, δg, δλ): DE(a, g, λ)(δa, δg, δλ) = (1/4πc)(r∧δa - f∧δg).

        The condition is affine in λ; λ is found by least squares over a basis of
        displacements and the worst remaining residual is returned with it.
        """
        scale = 1.0 / (4.0 * np.pi * self.c_light)
        n2 = self.space.size(2)
        zero_a = GradedElement.zero(self.space, Kind.COVECTOR, Parity.EVEN, 1)
        zero_g = GradedElement.zero(self.space, Kind.COVECTOR, Parity.ODD, self.space.dim - 2)
        zero_l = GradedElement.zero(self.space, Kind.COVECTOR, Parity.EVEN, 2)
        directions = [(da, zero_g, zero_l) for da in self._basis(Kind.COVECTOR, Parity.EVEN, 1)]
        directions += [(zero_a, dg, zero_l) for dg in self._basis(Kind.COVECTOR, Parity.ODD, self.space.dim - 2)]
        directions += [(zero_a, zero_g, dl) for dl in self._basis(Kind.COVECTOR, Parity.EVEN, 2)]

        def residual(lam: GradedElement) -> np.ndarray:
            return np.array(
                [
                    float((self.energy_derivative(delta.a, delta.g, lam, da, dg, dl) - scale * (wedge(delta.r, da) - wedge(delta.f, dg))).coefficients[0])
                    for da, dg, dl in directions
                ]
            )

        offset = residual(zero_l)
        columns = [residual(GradedElement(self.space, Kind.COVECTOR, Parity.EVEN, 2, row)) - offset for row in np.eye(n2)]
        solution, *_ = np.linalg.lstsq(np.stack(columns, axis=1), -offset, rcond=None)
        lam = GradedElement(self.space, Kind.COVECTOR, Parity.EVEN, 2, solution)
        return float(np.max(np.abs(residual(lam)))), lam

    def hamiltonian_closed_form_residual(self, delta: PhaseDelta) -> float:
        """max(|∧²g(√|g⁻¹| ⌞ g) - f|, |r|)."""
        return max((self.constitutive_inverse(delta.g) - delta.f).norm(), delta.r.norm())

    def in_lagrangian_dynamics(self, delta: PhaseDelta, tol: Optional[float] = None) -> bool:
        return self.lagrangian_dynamics_residual(delta) <= (tol if tol is not None else self.settings.tol_algebra)

    def in_energy_dynamics(self, delta: PhaseDelta, tol: Optional[float] = None) -> bool:
        return self.energy_dynamics_residual(delta)[0] <= (tol if tol is not None else self.settings.tol_algebra)

    def in_hamiltonian_dynamics(self, delta: PhaseDelta, tol: Optional[float] = None) -> bool:
        return self.hamiltonian_dynamics_residual(delta) <= (tol if tol is not None else self.settings.tol_algebra)

    def in_hamiltonian_closed_form(self, delta: PhaseDelta, tol: Optional[float] = None) -> bool:
        return self.hamiltonian_closed_form_residual(delta) <= (tol if tol is not None else self.settings.tol_algebra)

    def _displacements(
        self, zero_a: GradedElement, zero_other: GradedElement, parity: Parity
    ) -> Iterable[Tuple[GradedElement, GradedElement]]:
        for da in self._basis(Kind.COVECTOR, Parity.EVEN, 1):
            yield da, zero_other
        for other in self._basis(Kind.COVECTOR, parity, zero_other.grade):
            yield zero_a, other

    # -- trajectories --------------------------------------------------------------------------------------

    def build_trajectory(self, spec: TrajectorySpec, name: str = "") -> Trajectory:
        """Instantiate (A, G, J) from named families; G and J may be derived from A."""
        space = self.space
        m = space.dim
        A = build_family(spec.A, space, self.structure.inverse)
        if isinstance(spec.G, FieldFamilySpec):
            G = build_family(spec.G, space, self.structure.inverse)
        elif spec.G == "zero":
            G = zero_form(space, Parity.ODD, m - 2)
        else:
            G = self.constitutive_form(exterior_derivative(A))
        if spec.G_perturbation:
            G = G + constant_form(space, Parity.ODD, m - 2, spec.G_perturbation)
        if isinstance(spec.J, FieldFamilySpec):
            J = build_family(spec.J, space, self.structure.inverse)
        elif spec.J == "from_maxwell":
            J = (self.c_light / (4.0 * np.pi)) * exterior_derivative(G)
        else:
            J = zero_form(space, Parity.ODD, m - 1)
        if spec.J_perturbation:
            J = J + constant_form(space, Parity.ODD, m - 1, spec.J_perturbation)
        try:
            return Trajectory(A, G, J, name or spec.A.family)
        except (GradeMismatchError, ParityMismatchError) as e:
            raise FamilyError(f"trajectory components have the wrong type: {e.detail}")

    def box(self, lower: Sequence[float], upper: Sequence[float]) -> CubeDomain:
        """A compact box integrated at the configured quadrature order."""
        return CubeDomain(lower, upper, order=self.settings.quad_order, space=self.space)

    def default_region(self, trajectory: Trajectory) -> CubeDomain:
        """The unit box at the origin, shifted off the spatial origin when the domain excludes it."""
        lower = np.zeros(self.space.dim)
        if trajectory.domain is not None and not trajectory.domain.contains_box(lower, lower + 1.0):
            lower[1:] = 1.0
        return self.box(lower, lower + 1.0)

    def lattice_points(self, region: CubeDomain) -> np.ndarray:
        """4·4·2·…·2 interior lattice points of the region (64 in four dimensions)."""
        shape = (4, 4) + (2,) * (self.space.dim - 2)
        axes = [
            np.linspace(low, high, count + 2)[1:-1]
            for low, high, count in zip(region.lower, region.upper, shape[: self.space.dim])
        ]
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, self.space.dim)

    def sample_points(self, region: CubeDomain, count: int, rng: np.random.Generator) -> np.ndarray:
        """The fixed lattice followed by `count` seeded random interior points."""
        random = region.lower + rng.uniform(0.05, 0.95, size=(count, self.space.dim)) * (region.upper - region.lower)
        return np.concatenate([self.lattice_points(region), random])
