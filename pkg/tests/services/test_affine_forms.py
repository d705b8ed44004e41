# tests/services/test_affine_forms.py

import numpy as np
import pytest
import sympy

from oddforms.core.exceptions import (
    DegreeMismatchError,
    GradeMismatchError,
    GradeOverflowError,
    MissingDerivativeError,
    ParityMismatchError,
    SupportViolationError,
)
from oddforms.models.schemas import CubeDomainSpec, DiracSpec
from oddforms.services.affine_forms import (
    Box,
    Cell,
    Chain,
    ChainCurrent,
    CubeDomain,
    DiracCurrent,
    OffAxis,
    SmoothForm,
    exterior_derivative,
    integrate_current,
    stokes_residual,
    unit_cube_rule,
    wedge_forms,
)
from oddforms.services.exterior_algebra import (
    GradedElement,
    Kind,
    Orientation,
    Parity,
    SpaceDescriptor,
    covector,
    volume_vector,
)
from oddforms.services.families import random_polynomial_form
from oddforms.services.fields import CallableField, coordinate_symbols


@pytest.fixture
def space3():
    return SpaceDescriptor(3)


@pytest.fixture
def rng():
    return np.random.default_rng(11)


@pytest.fixture
def bent_square(space3):
    """A curved 2-cell in R³ with symbolic tangents."""
    s = sympy.symbols("s0:2", real=True)
    chart = [s[0] + s[1] ** 2 / 5, s[1] - s[0] * s[1] / 3, s[0] ** 2 / 4 + s[1] / 2]
    return Cell.from_expressions(space3, chart, 2)


class TestQuadrature:
    @pytest.mark.parametrize("order, grade", [(2, 1), (4, 2), (8, 3)])
    def test_weights_integrate_one(self, order, grade):
        nodes, weights = unit_cube_rule(order, grade)

        assert nodes.shape == (order**grade, grade)
        assert weights.sum() == pytest.approx(1.0)
        assert np.all((nodes > 0.0) & (nodes < 1.0))

    def test_cube_volume(self):
        """
        GIVEN the constant odd top form 2·e_o∧e⁰∧…∧e³
        WHEN integrated over the box [0,1]×[0,2]×[1,2]×[-1,2]
        THEN the integral is twice the box volume.
        """
        space = SpaceDescriptor.minkowski()
        box = CubeDomain([0.0, 0.0, 1.0, -1.0], [1.0, 2.0, 2.0, 2.0], space=space)
        form = SmoothForm.constant(GradedElement(space, Kind.COVECTOR, Parity.ODD, 4, [2.0]))

        assert box.integrate(form) == pytest.approx(12.0)

    def test_odd_integrals_flip_with_orientation(self, space3):
        form = SmoothForm.constant(covector(space3, {(0, 1): 1.5}, 2, Parity.ODD))
        cell = Cell.affine(space3, [0.0, 0.0, 0.0], [[1.0, 0.0, 0.0], [0.0, 2.0, 0.0]])

        assert cell.integrate(form) == pytest.approx(3.0)
        assert cell.reoriented(Orientation(-1)).integrate(form) == pytest.approx(-3.0)

    def test_even_integrals_ignore_orientation(self, space3):
        form = SmoothForm.constant(covector(space3, {(0, 1): 1.5}, 2))
        cell = Cell.affine(space3, [0.0, 0.0, 0.0], [[1.0, 0.0, 0.0], [0.0, 2.0, 0.0]], Orientation(-1))

        assert cell.integrate(form) == pytest.approx(3.0)

    def test_grade_mismatch(self, space3, bent_square):
        form = SmoothForm.constant(covector(space3, {(0,): 1.0}, 1))

        with pytest.raises(GradeMismatchError):
            bent_square.integrate(form)


class TestExteriorDerivative:
    def test_d_squared_vanishes(self, space3, rng):
        form = random_polynomial_form(rng, space3, Parity.ODD, 1, degree=3)
        points = rng.uniform(-1.0, 1.0, size=(10, 3))

        twice = exterior_derivative(exterior_derivative(form))

        assert twice.parity is Parity.ODD
        np.testing.assert_allclose(twice.coefficients(points), 0.0, atol=1e-10)

    def test_gradient_of_a_function(self, space3):
        x = coordinate_symbols(3)
        f = SmoothForm(space3, Parity.EVEN, 0, CallableField(3, 1, lambda p: p[:, :1] * p[:, 1:2]))
        g = SmoothForm.from_expressions(space3, Parity.EVEN, 0, [x[0] * x[1]])

        np.testing.assert_allclose(exterior_derivative(g).at([2.0, 3.0, 0.0]).coefficients, [3.0, 2.0, 0.0])
        np.testing.assert_allclose(exterior_derivative(f).at([2.0, 3.0, 0.0]).coefficients, [3.0, 2.0, 0.0], atol=1e-8)

    def test_analytic_derivative_can_be_required(self, space3):
        f = SmoothForm(space3, Parity.EVEN, 0, CallableField(3, 1, lambda p: p[:, :1]))

        with pytest.raises(MissingDerivativeError):
            exterior_derivative(f, require_analytic=True)

    def test_top_forms_have_no_derivative(self, space3):
        with pytest.raises(GradeOverflowError):
            exterior_derivative(SmoothForm.zero(space3, Parity.ODD, 3))

    def test_leibniz_rule(self, space3, rng):
        """d(A∧B) = dA∧B + (-1)^p A∧dB."""
        a = random_polynomial_form(rng, space3, Parity.EVEN, 1)
        b = random_polynomial_form(rng, space3, Parity.ODD, 1)
        points = rng.uniform(-1.0, 1.0, size=(8, 3))

        left = exterior_derivative(wedge_forms(a, b))
        right = wedge_forms(exterior_derivative(a), b) - wedge_forms(a, exterior_derivative(b))

        np.testing.assert_allclose(left.coefficients(points), right.coefficients(points), atol=1e-10)


class TestStokes:
    def test_on_a_bent_cell(self, space3, rng, bent_square):
        form = random_polynomial_form(rng, space3, Parity.EVEN, 1, degree=2)

        assert stokes_residual(form, Chain.of(bent_square), order=8) < 1e-10

    def test_on_an_odd_chain(self, space3, rng):
        form = random_polynomial_form(rng, space3, Parity.ODD, 2, degree=2)
        cell = Cell.affine(space3, [0.5, -1.0, 0.0], [[1.0, 0.2, 0.0], [0.0, 1.0, 0.3], [0.1, 0.0, 1.0]], Orientation(-1))

        assert stokes_residual(form, Chain.of(cell, Parity.ODD), order=6) < 1e-10

    def test_parity_must_match_the_chain(self, space3, rng, bent_square):
        form = random_polynomial_form(rng, space3, Parity.ODD, 1)

        with pytest.raises(ParityMismatchError):
            stokes_residual(form, Chain.of(bent_square))

    def test_boundary_of_boundary(self, space3, bent_square):
        """∂∂C integrates every 0-form to zero."""
        x = coordinate_symbols(3)
        form = SmoothForm.from_expressions(space3, Parity.EVEN, 0, [sympy.exp(x[0]) + x[1] * x[2]])

        twice = Chain.of(bent_square).boundary().boundary()

        assert len(twice.terms) == 8
        assert twice.integrate(form) == pytest.approx(0.0, abs=1e-12)


class TestCurrents:
    def test_dirac_current_evaluates_the_pairing(self):
        space = SpaceDescriptor.minkowski()
        x = coordinate_symbols(4)
        form = SmoothForm.from_expressions(space, Parity.ODD, 4, [x[0] * x[3] + 1])
        current = DiracCurrent([2.0, 0.0, 0.0, 3.0], 0.5 * volume_vector(space))

        assert integrate_current(form, current) == pytest.approx(3.5)

    def test_dirac_boundary_integrates_the_derivative(self):
        space = SpaceDescriptor.minkowski()
        x = coordinate_symbols(4)
        form = SmoothForm.from_expressions(space, Parity.ODD, 3, [0, 0, 0, x[0] ** 2])
        current = DiracCurrent([1.5, 0.0, 0.0, 0.0], volume_vector(space))

        # d(x0² e_o∧e¹∧e²∧e³) = 2x0 e_o∧e⁰∧e¹∧e²∧e³
        assert current.integrate_boundary(form) == pytest.approx(3.0)

    def test_dirac_needs_an_odd_top_vector(self):
        space = SpaceDescriptor.minkowski()
        w = GradedElement(space, Kind.VECTOR, Parity.EVEN, 4, [1.0])

        with pytest.raises(DegreeMismatchError):
            DiracCurrent([0.0] * 4, w)

    def test_currents_integrate_odd_forms_only(self):
        space = SpaceDescriptor.minkowski()
        box = CubeDomain([0.0] * 4, [1.0] * 4, space=space)
        form = SmoothForm.constant(GradedElement(space, Kind.COVECTOR, Parity.EVEN, 4, [1.0]))

        with pytest.raises(DegreeMismatchError):
            box.integrate(form)

    def test_support_must_lie_in_the_domain(self):
        """
        GIVEN a form defined off the spatial origin
        WHEN integrated over a box containing the origin
        THEN the support check rejects it.
        """
        space = SpaceDescriptor.minkowski()
        form = SmoothForm.constant(GradedElement(space, Kind.COVECTOR, Parity.ODD, 4, [1.0]), OffAxis((1, 2, 3)))

        with pytest.raises(SupportViolationError):
            CubeDomain([0.0, -1.0, -1.0, -1.0], [1.0] * 4, space=space).integrate(form)
        assert CubeDomain([0.0, 1.0, 1.0, 1.0], [1.0, 2.0, 2.0, 2.0], space=space).integrate(form) == pytest.approx(1.0)

    def test_box_domains_are_open(self):
        region = Box((0.0, 0.0), (1.0, 1.0))

        assert region.contains_box((0.1, 0.1), (0.9, 0.9))
        assert not region.contains_box((0.0, 0.1), (0.9, 0.9))

    def test_chain_current_matches_cube_domain(self, rng):
        space = SpaceDescriptor(3)
        form = random_polynomial_form(rng, space, Parity.ODD, 2, degree=2)
        box = CubeDomain([0.0, 0.0, 0.0], [1.0, 2.0, 0.5], space=space)

        current = ChainCurrent(box.chain)

        assert current.integrate_boundary(form) == pytest.approx(box.integrate_boundary(form))
        assert box.integrate(exterior_derivative(form)) == pytest.approx(box.integrate_boundary(form))

    def test_face_points_lie_on_the_boundary(self):
        box = CubeDomain([0.0, 0.0], [1.0, 2.0])

        points = box.face_points(3)
        on_face = np.isclose(points, box.lower).any(axis=1) | np.isclose(points, box.upper).any(axis=1)

        assert points.shape == (4 * 3, 2)
        assert on_face.all()
        assert box.interior_points(3).shape == (9, 2)

    def test_empty_chain_is_not_a_current(self):
        with pytest.raises(DegreeMismatchError, match="at least one cell"):
            ChainCurrent(Chain(4, Parity.ODD, ()))

    def test_cube_domain_integrates_at_its_own_order(self):
        """
        GIVEN x0⁶ as an odd 4-form on the unit box
        WHEN integrated by boxes built with quadrature orders 1 and 8
        THEN the one-point rule gives the midpoint value and order 8 is exact.
        """
        space = SpaceDescriptor.minkowski()
        x = coordinate_symbols(4)
        form = SmoothForm.from_expressions(space, Parity.ODD, 4, [x[0] ** 6])

        coarse = CubeDomain([0.0] * 4, [1.0] * 4, order=1, space=space)
        fine = CubeDomain([0.0] * 4, [1.0] * 4, order=8, space=space)

        assert coarse.integrate(form) == pytest.approx(0.5**6)
        assert fine.integrate(form) == pytest.approx(1.0 / 7.0)


class TestCurrentSpecs:
    def test_cube_domain_from_spec(self):
        spec = CubeDomainSpec(min=[0.0, 1.0, 1.0, 1.0], max=[1.0, 2.0, 2.0, 2.0])

        box = CubeDomain.from_spec(spec, order=3, space=SpaceDescriptor.minkowski())

        np.testing.assert_array_equal(box.lower, [0.0, 1.0, 1.0, 1.0])
        assert box.order == 3
        assert box.space == SpaceDescriptor.minkowski()

    def test_dirac_current_from_spec(self):
        """The {point, w} document evaluates an odd 4-form like the directly built current."""
        space = SpaceDescriptor.minkowski()
        spec = DiracSpec.model_validate(
            {
                "point": [2.0, 0.0, 0.0, 3.0],
                "w": {"kind": "vector", "parity": "odd", "grade": 4, "dim": 4, "first_label": 0, "coeffs": {"0,1,2,3": 0.5}},
            }
        )
        x = coordinate_symbols(4)
        form = SmoothForm.from_expressions(space, Parity.ODD, 4, [x[0] * x[3] + 1])

        current = DiracCurrent.from_spec(spec)

        assert integrate_current(form, current) == pytest.approx(3.5)
        assert current.same_as(DiracCurrent([2.0, 0.0, 0.0, 3.0], 0.5 * volume_vector(space)))

    def test_dirac_spec_needs_an_odd_top_vector(self):
        spec = DiracSpec.model_validate(
            {"point": [0.0] * 4, "w": {"kind": "vector", "parity": "even", "grade": 4, "dim": 4, "coeffs": {"1,2,3,4": 1.0}}}
        )

        with pytest.raises(DegreeMismatchError):
            DiracCurrent.from_spec(spec)
