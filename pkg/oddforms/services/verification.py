"""
The invariant suites behind ``oddforms verify``. Every suite draws from its own seeded
generator, so a suite gives the same checks whether it runs alone or inside "all".
"""

from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np
import sympy

from oddforms import __version__
from oddforms.core.config import Settings, get_settings
from oddforms.core.exceptions import ConfigurationError
from oddforms.core.logger import setup_logger
from oddforms.models.schemas import CheckRecord, FieldFamilySpec, Report, TrajectorySpec
from oddforms.services.affine_forms import (
    Cell,
    Chain,
    CubeDomain,
    DiracCurrent,
    SmoothForm,
    exterior_derivative,
    stokes_residual,
)
from oddforms.services.electrodynamics import ElectrodynamicsService, PhaseDelta, Trajectory
from oddforms.services.exterior_algebra import (
    GradedElement,
    Kind,
    Orientation,
    Parity,
    SpaceDescriptor,
    pair,
    volume_vector,
    wedge,
)
from oddforms.services.families import random_polynomial_form
from oddforms.services.fields import ExpressionField, coordinate_symbols
from oddforms.services.variational import (
    CovectorRep,
    Dk_analytic,
    Dk_fd,
    FieldRep,
    QuadraticDensity,
    covector_pairing,
    eval_kappa,
    fields_equivalent,
    kappa_derivative,
)
from oddforms.services.weyl import (
    BilinearForm,
    HomQM,
    TensorQM,
    iq_forward,
    iq_inverse,
    minor_expansion,
    tensor_pairing,
    weyl_map,
    weyl_matrix,
    weyl_of,
)

logger = setup_logger(__name__)

SUITES = ("lemma1", "weyl", "stokes", "variation", "dynamics", "legendre")
DEFAULT_DIMS = (2, 3, 4, 5)

LEMMA1_SAMPLES = 1000
IDENTITY_SAMPLES = 500
STOKES_CELLS = 100
STOKES_ORDERS = (2, 4, 6, 8)
VARIATION_SAMPLES = 50
KERNEL_SAMPLES = 10
FIELD_SAMPLES = 50
PROBE_DISPLACEMENTS = 10
AGREEMENT_SAMPLES = 200
MOMENTUM_SAMPLES = 100
RANDOM_SAMPLE_POINTS = 16
DETECTION_THRESHOLD = 1e-3


def random_element(
    rng: np.random.Generator, space: SpaceDescriptor, kind: Kind, parity: Parity, grade: int
) -> GradedElement:
    return GradedElement(space, kind, parity, grade, rng.uniform(-1.0, 1.0, size=space.size(grade)))


def random_density(rng: np.random.Generator, space: SpaceDescriptor) -> QuadraticDensity:
    """A constant quadratic density with symmetric λ and ν blocks."""
    n1, n2 = space.size(1), space.size(2)
    lam = rng.uniform(-1.0, 1.0, size=(n1, n1))
    nu = rng.uniform(-1.0, 1.0, size=(n2, n2))
    return QuadraticDensity.constant(space, (lam + lam.T) / 2.0, rng.uniform(-1.0, 1.0, size=(n1, n2)), (nu + nu.T) / 2.0)


def random_cube(rng: np.random.Generator, space: SpaceDescriptor, order: Optional[int] = None) -> CubeDomain:
    lower = rng.uniform(-1.0, 0.0, size=space.dim)
    return CubeDomain(lower, lower + rng.uniform(0.5, 1.5, size=space.dim), order=order, space=space)


def random_cell(rng: np.random.Generator, space: SpaceDescriptor, grade: int, orientation: Orientation) -> Cell:
    """A slightly bent q-cell χ(s) = x₀ + Σ s_i e_i + Σ b_i s_i²."""
    s = sympy.symbols(f"s0:{grade}", real=True)
    origin = rng.uniform(-1.0, 1.0, size=space.dim)
    edges = rng.uniform(-1.0, 1.0, size=(grade, space.dim))
    bend = rng.uniform(-0.3, 0.3, size=(grade, space.dim))
    expressions = [
        float(origin[mu]) + sum(float(edges[i, mu]) * s[i] + float(bend[i, mu]) * s[i] ** 2 for i in range(grade))
        for mu in range(space.dim)
    ]
    return Cell.from_expressions(space, expressions, grade, orientation)


def oscillating_instance(space: SpaceDescriptor):
    """A non-polynomial 1-form on a curved 2-cell; low quadrature orders miss Stokes on it."""
    x = coordinate_symbols(space.dim)
    s = sympy.symbols("s0:2", real=True)
    form = SmoothForm(
        space,
        Parity.EVEN,
        1,
        ExpressionField(space.dim, [sympy.cos(3 * x[0] * x[1]), sympy.sin(2 * x[0] + 3 * x[1]), sympy.exp(x[2]), 0], x),
        name="oscillating",
    )
    chart = [s[0], s[1] + sympy.Rational(3, 10) * s[0] ** 2, s[0] * s[1] / 2, sympy.Rational(1, 4) * s[1]]
    return form, Chain.of(Cell.from_expressions(space, chart, 2), Parity.EVEN)


def _record(
    name: str, value: float, tolerance: float, passed: Optional[bool] = None, detail: Optional[str] = None
) -> CheckRecord:
    value = float(value)
    if passed is None:
        passed = bool(np.isfinite(value) and value <= tolerance)
    if not passed:
        logger.warning(f"check {name} failed: value={value:.3e} tolerance={tolerance:.1e}")
    return CheckRecord(name=name, value=value, tolerance=float(tolerance), passed=passed, detail=detail)


def _relative(first: float, second: float) -> float:
    return abs(first - second) / max(1.0, abs(second))


def parse_dims(text: str) -> List[int]:
    """'2..5' or '2,3,4' into a list of dimensions."""
    try:
        if ".." in text:
            low, high = (int(part) for part in text.split("..", 1))
            dims = list(range(low, high + 1))
        else:
            dims = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise ConfigurationError(f"cannot parse dimensions '{text}'")
    if not dims or min(dims) < 1:
        raise ConfigurationError(f"dimensions must be positive, got '{text}'")
    return dims


class VerificationService:
    """Runs the invariant suites and collects their checks into a report"""

    def __init__(self, settings: Optional[Settings] = None):
        self.settings = settings or get_settings()
        self.electrodynamics = ElectrodynamicsService(settings=self.settings)
        self.space = self.electrodynamics.space

    def _rng(self, suite: str) -> np.random.Generator:
        return np.random.default_rng([self.settings.seed, SUITES.index(suite)])

    def run(self, suite: str, dims: Optional[Sequence[int]] = None) -> Report:
        if suite != "all" and suite not in SUITES:
            raise ConfigurationError(f"unknown suite '{suite}', expected one of {', '.join(SUITES + ('all',))}")
        dims = list(dims or DEFAULT_DIMS)
        names = SUITES if suite == "all" else (suite,)
        checks: List[CheckRecord] = []
        for name in names:
            logger.info(f"running suite {name}")
            checks.extend(self._run_suite(name, dims))
        report = Report(suite=suite, checks=checks, version=__version__, config=self._config_echo(dims))
        logger.info(f"suite {suite} finished: {sum(c.passed for c in checks)}/{len(checks)} checks passed")
        return report

    def _run_suite(self, name: str, dims: Sequence[int]) -> List[CheckRecord]:
        if name in ("lemma1", "weyl"):
            return getattr(self, name)(dims)
        return getattr(self, name)()

    def _config_echo(self, dims: Sequence[int]) -> Dict[str, object]:
        settings = self.settings
        return {
            "c_light": settings.c_light,
            "dims": list(dims),
            "metric": list(settings.metric),
            "quad_order": settings.quad_order,
            "seed": settings.seed,
            "tol_algebra": settings.tol_algebra,
            "tol_quad": settings.tol_quad,
            "tol_residual": settings.tol_residual,
        }

    # -- algebra -------------------------------------------------------------------------------

    def lemma1(self, dims: Sequence[int]) -> List[CheckRecord]:
        """weyl_map against the signed minor expansion."""
        rng = self._rng("lemma1")
        tol = self.settings.tol_algebra
        pairs = sum(m + 1 for m in dims)
        per_pair = -(-LEMMA1_SAMPLES // pairs)
        records = []
        for m in dims:
            space = SpaceDescriptor(m)
            worst = 0.0
            for q in range(m + 1):
                for _ in range(per_pair):
                    w = random_element(rng, space, Kind.VECTOR, Parity.EVEN, q)
                    e = random_element(rng, space, Kind.COVECTOR, Parity.ODD, m)
                    worst = max(worst, (weyl_map(TensorQM(w, e)) - minor_expansion(w, e)).norm())
            records.append(_record(f"lemma1.weyl_vs_minors.m={m}", worst, tol))
        return records

    def weyl(self, dims: Sequence[int]) -> List[CheckRecord]:
        rng = self._rng("weyl")
        tol = self.settings.tol_algebra
        records = []
        for m in dims:
            smallest = np.inf
            square = True
            for q in range(m + 1):
                matrix = weyl_matrix(m, q)
                square = square and matrix.shape[0] == matrix.shape[1]
                normalized = matrix / np.linalg.norm(matrix, axis=0)
                smallest = min(smallest, abs(np.linalg.det(normalized)) if square else 0.0)
            records.append(
                _record(
                    f"weyl.isomorphism.m={m}",
                    smallest,
                    1e-9,
                    passed=bool(square and smallest > 1e-9),
                    detail="smallest |det| of the column-normalized Weyl matrix",
                )
            )

        tensor_worst = hom_worst = roundtrip_worst = characterization_worst = bilinear_worst = 0.0
        for _ in range(IDENTITY_SAMPLES):
            m = int(rng.choice(dims))
            space = SpaceDescriptor(m)
            q, q_prime = (int(value) for value in rng.integers(0, m + 1, size=2))

            a = random_element(rng, space, Kind.COVECTOR, Parity.EVEN, q)
            w = random_element(rng, space, Kind.VECTOR, Parity.EVEN, q)
            e = random_element(rng, space, Kind.COVECTOR, Parity.ODD, m)
            tensor_worst = max(tensor_worst, (pair(a, w) * e - wedge(a, weyl_map(TensorQM(w, e)))).norm())

            l = HomQM(space, q, rng.uniform(-1.0, 1.0, size=space.size(q)))
            hom_worst = max(hom_worst, (l(a) - wedge(a, weyl_map(iq_forward(l)))).norm())
            roundtrip_worst = max(roundtrip_worst, float(np.max(np.abs(iq_inverse(iq_forward(l)).matrix - l.matrix))))
            u = volume_vector(space)
            for row in np.eye(space.size(q)):
                basis = GradedElement(space, Kind.COVECTOR, Parity.EVEN, q, row)
                characterization_worst = max(
                    characterization_worst, abs(tensor_pairing(iq_forward(l), basis, u) - pair(l(basis), u))
                )

            b = BilinearForm(space, q, q_prime, rng.uniform(-1.0, 1.0, size=(space.size(q), space.size(q_prime))))
            a_prime = random_element(rng, space, Kind.COVECTOR, Parity.EVEN, q_prime)
            direct = b(a, a_prime)
            bilinear_worst = max(
                bilinear_worst,
                (direct - wedge(a_prime, weyl_of(b.bar(a)))).norm(),
                (direct - wedge(a, weyl_of(b.double_bar(a_prime)))).norm(),
            )

        records += [
            _record("weyl.pairing_times_volume", tensor_worst, tol, detail="⟨a,w⟩e = a ∧ We(w⊗e)"),
            _record("weyl.hom_representation", hom_worst, tol, detail="l(a) = a ∧ We(i_q(l))"),
            _record("weyl.iq_roundtrip", roundtrip_worst, tol),
            _record("weyl.iq_characterization", characterization_worst, tol),
            _record("weyl.bilinear_representation", bilinear_worst, tol, detail="b(a,a') = a'∧We(b̄(a)) = a∧We(b̿(a'))"),
        ]
        return records

    # -- integration -------------------------------------------------------------------------------

    def stokes(self) -> List[CheckRecord]:
        rng = self._rng("stokes")
        order = self.settings.quad_order
        tol = self.settings.tol_quad
        worst = 0.0
        for index in range(STOKES_CELLS):
            grade = 1 + index % 3
            parity = Parity.EVEN if index % 2 == 0 else Parity.ODD
            orientation = Orientation(int(rng.choice([-1, 1])))
            cell = random_cell(rng, self.space, grade, orientation)
            form = random_polynomial_form(rng, self.space, parity, grade - 1)
            worst = max(worst, stokes_residual(form, Chain.of(cell, parity), order))

        form, chain = oscillating_instance(self.space)
        oscillating = stokes_residual(form, chain, order)
        by_order = [stokes_residual(form, chain, q) for q in STOKES_ORDERS]
        increase = max(max(later - earlier for earlier, later in zip(by_order, by_order[1:])), 0.0)
        return [
            _record("stokes.random_cells", worst, tol, detail=f"{STOKES_CELLS} bent 1-/2-/3-cells at order {order}"),
            _record("stokes.non_polynomial", oscillating, tol, detail=f"quadrature order {order}"),
            _record(
                "stokes.convergence",
                increase,
                self.settings.tol_algebra,
                detail="residuals at orders " + ", ".join(f"{q}: {r:.3e}" for q, r in zip(STOKES_ORDERS, by_order)),
            ),
        ]

    # -- variational calculus ------------------------------------------------------------------------

    def variation(self) -> List[CheckRecord]:
        rng = self._rng("variation")
        space = self.space
        m = space.dim
        step = self.settings.variation_step
        cube_worst = dirac_worst = step_worst = pointwise_worst = route_worst = 0.0
        for _ in range(VARIATION_SAMPLES):
            kappa = random_density(rng, space)
            A = random_polynomial_form(rng, space, Parity.EVEN, 1)
            delta_A = random_polynomial_form(rng, space, Parity.EVEN, 1)
            cube = random_cube(rng, space, self.settings.quad_order)
            cube_worst = max(cube_worst, _relative(Dk_analytic(kappa, A, delta_A, cube), Dk_fd(kappa, A, delta_A, cube)))

            x = rng.uniform(-1.0, 1.0, size=m)
            dirac = DiracCurrent(x, random_element(rng, space, Kind.VECTOR, Parity.ODD, m))
            fine = Dk_fd(kappa, A, delta_A, dirac, step=1e-3)
            dirac_worst = max(dirac_worst, _relative(Dk_analytic(kappa, A, delta_A, dirac), fine))
            step_worst = max(step_worst, _relative(Dk_fd(kappa, A, delta_A, dirac, step=1e-1), fine))

            a, delta_a = (random_element(rng, space, Kind.COVECTOR, Parity.EVEN, 1) for _ in range(2))
            f, delta_f = (random_element(rng, space, Kind.COVECTOR, Parity.EVEN, 2) for _ in range(2))
            central = (
                eval_kappa(kappa, x, a + step * delta_a, f + step * delta_f)
                - eval_kappa(kappa, x, a - step * delta_a, f - step * delta_f)
            ) / (2.0 * step)
            pointwise_worst = max(pointwise_worst, (kappa_derivative(kappa, x, a, f, delta_a, delta_f) - central).norm())

            G = random_polynomial_form(rng, space, Parity.ODD, m - 2)
            J = random_polynomial_form(rng, space, Parity.ODD, m - 1)
            covector = CovectorRep(G, J, cube, self.electrodynamics.c_light)
            stokes = covector_pairing(covector, delta_A, route="stokes")
            for route in ("direct", "expanded"):
                route_worst = max(route_worst, _relative(covector_pairing(covector, delta_A, route=route), stokes))

        kernel = self.electrodynamics.lagrangian_kernel()
        kernel_worst = 0.0
        for _ in range(KERNEL_SAMPLES):
            A = random_polynomial_form(rng, space, Parity.EVEN, 1)
            delta_A = random_polynomial_form(rng, space, Parity.EVEN, 1)
            cube = random_cube(rng, space, self.settings.quad_order)
            closed_form = self.electrodynamics.action_variation(A, delta_A, cube)
            kernel_worst = max(
                kernel_worst,
                _relative(closed_form, Dk_fd(kernel, A, delta_A, cube)),
                _relative(closed_form, Dk_analytic(kernel, A, delta_A, cube)),
            )

        A = random_polynomial_form(rng, space, Parity.EVEN, 1)
        unit = self.electrodynamics.box(np.zeros(m), np.ones(m))
        same = fields_equivalent(FieldRep(A, unit), FieldRep(A, self.electrodynamics.box(np.zeros(m), np.ones(m))))
        separated = not fields_equivalent(FieldRep(A, unit), FieldRep(A, self.electrodynamics.box(np.zeros(m), 2.0 * np.ones(m))))

        tol = self.settings.tol_quad
        return [
            _record("variation.cube_currents", cube_worst, tol, detail="Dk analytic vs central difference"),
            _record("variation.dirac_currents", dirac_worst, 1e-10),
            _record("variation.quadratic_exactness", step_worst, 1e-10, detail="central differences at steps 1e-1 and 1e-3"),
            _record("variation.pointwise_derivative", pointwise_worst, 1e-8),
            _record("variation.pairing_routes", route_worst, tol, detail="stokes vs direct vs expanded"),
            _record("variation.lagrangian_closed_form", kernel_worst, tol, detail="-(1/4πc)∫ΛdA∧dδA vs Dk"),
            _record("variation.probes_identify_fields", 0.0 if same else 1.0, 0.0),
            _record("variation.probes_separate_currents", 0.0 if separated else 1.0, 0.0),
        ]

    # -- electrodynamics -------------------------------------------------------------------------------

    def _exact_polynomial_trajectory(self, rng: np.random.Generator, degree: int = 3) -> Trajectory:
        service = self.electrodynamics
        A = random_polynomial_form(rng, self.space, Parity.EVEN, 1, degree=degree)
        G = service.constitutive_form(exterior_derivative(A))
        J = (service.c_light / (4.0 * np.pi)) * exterior_derivative(G)
        return Trajectory(A, G, J, "random_polynomial")

    def builtin_solutions(self) -> Dict[str, TrajectorySpec]:
        return {
            "constant_field": TrajectorySpec(
                A=FieldFamilySpec(family="constant_field", F={"0,1": 0.7, "2,3": -0.4, "1,3": 0.2})
            ),
            "plane_wave": TrajectorySpec(
                A=FieldFamilySpec(family="plane_wave", k=[1.0, 1.0, 0.0, 0.0], pol=[0.0, 0.0, 1.0, 0.0], amp=1.0)
            ),
            "coulomb": TrajectorySpec(A=FieldFamilySpec(family="coulomb", q=1.0)),
        }

    def builtin_counterexamples(self) -> Dict[str, TrajectorySpec]:
        A = FieldFamilySpec(family="constant_field", F={"0,1": 0.7, "2,3": -0.4})
        return {
            "boundary_perturbed": TrajectorySpec(A=A, G_perturbation={"2,3": 1.0}, J="from_maxwell"),
            "source_mismatch": TrajectorySpec(A=A, J="from_maxwell", J_perturbation={"1,2,3": 1.0}),
        }

    def _principle_sup(self, trajectory: Trajectory, region: CubeDomain, probes: Iterable[SmoothForm]) -> float:
        service = self.electrodynamics
        return max(abs(service.virtual_action_residual(trajectory, delta_A, region)) for delta_A in probes)

    def dynamics(self) -> List[CheckRecord]:
        rng = self._rng("dynamics")
        service = self.electrodynamics
        settings = self.settings
        space = self.space
        m = space.dim
        unit = self.electrodynamics.box(np.zeros(m), np.ones(m))
        records: List[CheckRecord] = []

        equivalence_worst = conservation_worst = matrix_worst = 0.0
        points = service.sample_points(unit, RANDOM_SAMPLE_POINTS, rng)
        for _ in range(FIELD_SAMPLES):
            trajectory = self._exact_polynomial_trajectory(rng)
            J = random_polynomial_form(rng, space, Parity.ODD, m - 1)
            euler_lagrange = service.euler_lagrange_residual(trajectory.A, J).coefficients(points)
            maxwell = service.maxwell_residual(service.constitutive_form(trajectory.F), J).coefficients(points)
            equivalence_worst = max(equivalence_worst, float(np.max(np.abs(euler_lagrange - maxwell))))
            conservation_worst = max(
                conservation_worst, float(np.max(np.abs(exterior_derivative(trajectory.J).coefficients(points))))
            )
            x = points[int(rng.integers(0, len(points)))]
            matrix_worst = max(
                matrix_worst, (service.constitutive_form(trajectory.F).at(x) - service.constitutive(trajectory.F.at(x))).norm()
            )
        records += [
            _record("dynamics.euler_lagrange_is_maxwell", equivalence_worst, settings.tol_algebra),
            _record("dynamics.charge_conservation", conservation_worst, settings.tol_algebra, detail="dJ = 0 when J = (c/4π)dG"),
            _record("dynamics.constitutive_matrix_vs_contraction", matrix_worst, settings.tol_algebra),
        ]

        solutions = {name: service.build_trajectory(spec, name) for name, spec in self.builtin_solutions().items()}
        solutions["random_polynomial"] = self._exact_polynomial_trajectory(rng)

        plane_wave = solutions["plane_wave"]
        plane_wave_residual = float(
            np.max(np.abs(service.euler_lagrange_residual(plane_wave.A, plane_wave.J).coefficients(service.lattice_points(unit))))
        )
        records.append(_record("dynamics.plane_wave_vacuum", plane_wave_residual, 1e-9, detail="64 lattice points"))
        coulomb = solutions["coulomb"]
        coulomb_region = service.default_region(coulomb)
        coulomb_residual = float(
            np.max(np.abs(service.maxwell_residual(coulomb.G, coulomb.J).coefficients(service.sample_points(coulomb_region, RANDOM_SAMPLE_POINTS, rng))))
        )
        records.append(_record("dynamics.coulomb_off_origin", coulomb_residual, 1e-8))

        probes = service.probe_displacements(PROBE_DISPLACEMENTS, rng)
        for name, trajectory in solutions.items():
            region = service.default_region(trajectory)
            verdict = service.compact_domain_check(trajectory, region)
            records.append(
                _record(
                    f"dynamics.solution.{name}.compact_domain",
                    max(verdict.interior_residual, verdict.boundary_residual),
                    settings.tol_residual,
                    passed=verdict.passed,
                )
            )
            records.append(
                _record(f"dynamics.solution.{name}.virtual_action", self._principle_sup(trajectory, region, probes), settings.tol_quad)
            )

        for name, spec in self.builtin_counterexamples().items():
            trajectory = service.build_trajectory(spec, name)
            region = service.default_region(trajectory)
            verdict = service.compact_domain_check(trajectory, region)
            principle = self._principle_sup(trajectory, region, probes)
            if name == "boundary_perturbed":
                clause, value = "boundary constitutive relation G = Λ dA on ∂K", verdict.boundary_residual
                caught = verdict.boundary_residual > settings.tol_residual and verdict.interior_residual <= settings.tol_residual
            else:
                clause, value = "interior Euler-Lagrange equation d(Λ dA) = (4π/c)J in K", verdict.interior_residual
                caught = verdict.interior_residual > settings.tol_residual
            records.append(
                _record(
                    f"dynamics.counterexample.{name}.detected",
                    value,
                    settings.tol_residual,
                    passed=bool(caught and not verdict.passed and principle > DETECTION_THRESHOLD),
                    detail=f"violates the {clause}; virtual action residual {principle:.3e}",
                )
            )

        disagreements = membership_disagreements = 0
        for index in range(AGREEMENT_SAMPLES):
            trajectory = self._exact_polynomial_trajectory(rng, degree=2)
            violation = index % 4
            if violation == 1:
                trajectory = Trajectory(trajectory.A, 2.0 * trajectory.G, trajectory.J, "scaled_G")
            elif violation == 2:
                offset = random_polynomial_form(rng, space, Parity.ODD, m - 1, degree=0)
                trajectory = Trajectory(trajectory.A, trajectory.G, trajectory.J + offset, "offset_J")
            elif violation == 3:
                offset = random_polynomial_form(rng, space, Parity.ODD, m - 2, degree=1)
                trajectory = Trajectory(trajectory.A, trajectory.G + offset, trajectory.J, "perturbed_G")
            x = rng.uniform(-1.0, 1.0, size=m)
            lagrangian_side = service.infinitesimal_check(trajectory, x).passed
            hamiltonian_side = service.hamilton_check(trajectory, x).passed
            disagreements += int(lagrangian_side != hamiltonian_side)
            delta = PhaseDelta.from_trajectory(trajectory, x, service.structure)
            tol = settings.tol_residual
            memberships = {
                service.in_lagrangian_dynamics(delta, tol),
                service.in_energy_dynamics(delta, tol),
                service.in_hamiltonian_dynamics(delta, tol),
                service.in_hamiltonian_closed_form(delta, tol),
            }
            membership_disagreements += int(len(memberships) != 1 or lagrangian_side not in memberships)
        records += [
            _record("dynamics.infinitesimal_vs_hamilton", disagreements, 0.0, detail=f"{AGREEMENT_SAMPLES} (trajectory, point) pairs"),
            _record("dynamics.four_descriptions_agree", membership_disagreements, 0.0),
        ]

        doubled = ElectrodynamicsService(service.structure.with_c_light(2.0 * service.c_light), settings)
        f = random_element(rng, space, Kind.COVECTOR, Parity.EVEN, 2)
        g = random_element(rng, space, Kind.COVECTOR, Parity.ODD, m - 2)
        a = random_element(rng, space, Kind.COVECTOR, Parity.EVEN, 1)
        scaling = max(
            (doubled.lagrangian_density(f) - 0.5 * service.lagrangian_density(f)).norm(),
            (doubled.energy_density(a, g, f) - 0.5 * service.energy_density(a, g, f)).norm(),
            (doubled.hamiltonian_density(a, g) - 0.5 * service.hamiltonian_density(a, g)).norm(),
        )
        spec = self.builtin_solutions()["plane_wave"].model_copy(update={"J": "from_maxwell"})
        rescaled = doubled.compact_domain_check(doubled.build_trajectory(spec), unit)
        records += [
            _record("dynamics.c_scaling", scaling, settings.tol_algebra, detail="L, E, H at 2c are half of those at c"),
            _record(
                "dynamics.c_scaling_verdict",
                max(rescaled.interior_residual, rescaled.boundary_residual),
                settings.tol_residual,
                passed=rescaled.passed,
            ),
        ]
        return records

    def legendre(self) -> List[CheckRecord]:
        rng = self._rng("legendre")
        service = self.electrodynamics
        space = self.space
        m = space.dim
        tol = self.settings.tol_algebra
        step = self.settings.variation_step
        structure = service.structure
        identity = np.eye(space.size(2))
        duality = max(
            float(np.linalg.norm(structure.constitutive_inverse_matrix @ structure.constitutive_matrix - identity, 2)),
            float(np.linalg.norm(structure.constitutive_matrix @ structure.constitutive_inverse_matrix - identity, 2)),
        )

        def covector(parity: Parity, grade: int) -> GradedElement:
            return random_element(rng, space, Kind.COVECTOR, parity, grade)

        roundtrip = same_formula = critical = hamiltonian = energy_forms = expansion = lagrangian = 0.0
        for _ in range(MOMENTUM_SAMPLES):
            a, delta_a = covector(Parity.EVEN, 1), covector(Parity.EVEN, 1)
            f, lam, delta_lam = covector(Parity.EVEN, 2), covector(Parity.EVEN, 2), covector(Parity.EVEN, 2)
            g, delta_g = covector(Parity.ODD, m - 2), covector(Parity.ODD, m - 2)

            roundtrip = max(
                roundtrip,
                (service.constitutive_inverse(service.constitutive(f)) - f).norm(),
                (service.constitutive(service.constitutive_inverse(g)) - g).norm(),
            )
            same_formula = max(same_formula, (service.legendre(lam, a) - service.constitutive(lam)).norm())
            critical = max(critical, service.critical_set_residual(a, service.legendre(lam), lam))

            _, _, section_f = service.section(a, g)
            hamiltonian = max(hamiltonian, (service.hamiltonian_density(a, g) - service.energy_density(a, g, section_f)).norm())
            forms = service.energy_density_forms(a, g, f)
            energy_forms = max(energy_forms, max((form - forms[0]).norm() for form in forms[1:]))

            central = (
                service.energy_density(a + step * delta_a, g + step * delta_g, lam + step * delta_lam)
                - service.energy_density(a - step * delta_a, g - step * delta_g, lam - step * delta_lam)
            ) / (2.0 * step)
            expansion = max(expansion, (service.energy_derivative(a, g, lam, delta_a, delta_g, delta_lam) - central).norm())

            delta_f = covector(Parity.EVEN, 2)
            central = (
                service.lagrangian_density(f + step * delta_f, a + step * delta_a)
                - service.lagrangian_density(f - step * delta_f, a - step * delta_a)
            ) / (2.0 * step)
            lagrangian = max(lagrangian, (service.lagrangian_derivative(a, f, delta_a, delta_f) - central).norm())

        off_critical = service.critical_set_residual(
            covector(Parity.EVEN, 1), service.legendre(covector(Parity.EVEN, 2)) + covector(Parity.ODD, m - 2), covector(Parity.EVEN, 2)
        )
        return [
            _record("legendre.duality", duality, tol, detail="Λ⁻¹Λ and ΛΛ⁻¹ against the identity (spectral norm)"),
            _record("legendre.roundtrip", roundtrip, tol),
            _record("legendre.equals_constitutive", same_formula, tol),
            _record("legendre.critical_set", critical, tol),
            _record("legendre.off_critical_detected", off_critical, tol, passed=off_critical > tol),
            _record("legendre.hamiltonian_is_energy_on_section", hamiltonian, tol),
            _record("legendre.energy_expressions_agree", energy_forms, tol),
            _record("legendre.energy_derivative", expansion, 1e-8, detail="closed form vs central difference"),
            _record("legendre.lagrangian_derivative", lagrangian, 1e-8),
        ]
