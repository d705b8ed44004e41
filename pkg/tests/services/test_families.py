# tests/services/test_families.py

import numpy as np
import pytest

from oddforms.core.exceptions import FamilyError
from oddforms.models.schemas import FieldFamilySpec
from oddforms.services.affine_forms import OffAxis, exterior_derivative
from oddforms.services.exterior_algebra import Parity, SpaceDescriptor
from oddforms.services.families import (
    build_family,
    coefficient_vector,
    constant_field_potential,
    polynomial_form,
    random_polynomial_form,
)


@pytest.fixture
def minkowski():
    return SpaceDescriptor.minkowski()


@pytest.fixture
def inverse_metric():
    """g⁻¹ for the metric diag(1, -1, -1, -1)."""
    return np.diag([1.0, -1.0, -1.0, -1.0])


class TestFamilies:
    def test_constant_field_potential_has_the_requested_field(self, minkowski):
        """
        GIVEN F = 0.7 e^{01} - 0.4 e^{23}
        WHEN the linear potential is built and differentiated
        THEN dA reproduces F everywhere.
        """
        A = constant_field_potential(minkowski, {"0,1": 0.7, "2,3": -0.4})

        F = exterior_derivative(A).at([0.3, -1.0, 2.0, 5.0])

        assert F.coefficient((0, 1)) == pytest.approx(0.7)
        assert F.coefficient((2, 3)) == pytest.approx(-0.4)
        assert F.coefficient((1, 2)) == pytest.approx(0.0)

    def test_polynomial_terms(self, minkowski):
        form = polynomial_form(minkowski, Parity.EVEN, 1, [{"component": "2", "coeff": 3.0, "powers": [1, 0, 2, 0]}])

        np.testing.assert_allclose(form.at([2.0, 0.0, 3.0, 0.0]).coefficients, [0.0, 0.0, 54.0, 0.0])

    def test_plane_wave_is_built_from_inline_parameters(self, minkowski, inverse_metric):
        spec = FieldFamilySpec(family="plane_wave", k=[1.0, 1.0, 0.0, 0.0], pol=[0.0, 0.0, 1.0, 0.0], amp=2.0)

        A = build_family(spec, minkowski, inverse_metric)

        assert A.name == "plane_wave"
        assert A.at([0.0, 0.0, 0.0, 0.0]).coefficient((2,)) == pytest.approx(2.0)
        assert A.field.has_analytic_gradient

    def test_coulomb_is_defined_off_the_spatial_origin(self, minkowski):
        A = build_family(FieldFamilySpec(family="coulomb", q=2.0), minkowski)

        assert A.domain == OffAxis((1, 2, 3))
        assert A.at([0.0, 0.0, 0.0, 4.0]).coefficient((0,)) == pytest.approx(0.5)

    def test_random_forms_are_reproducible(self, minkowski):
        first = random_polynomial_form(np.random.default_rng(5), minkowski, Parity.ODD, 2)
        second = random_polynomial_form(np.random.default_rng(5), minkowski, Parity.ODD, 2)
        x = np.array([0.1, 0.2, 0.3, 0.4])

        np.testing.assert_array_equal(first.at(x).coefficients, second.at(x).coefficients)


class TestFamilyErrors:
    def test_plane_wave_needs_a_null_wave_covector(self, minkowski, inverse_metric):
        spec = FieldFamilySpec(family="plane_wave", k=[1.0, 0.5, 0.0, 0.0], pol=[0.0, 0.0, 1.0, 0.0])

        with pytest.raises(FamilyError, match="not null"):
            build_family(spec, minkowski, inverse_metric)

    def test_plane_wave_needs_transverse_polarization(self, minkowski, inverse_metric):
        spec = FieldFamilySpec(family="plane_wave", k=[1.0, 1.0, 0.0, 0.0], pol=[0.0, 1.0, 0.0, 0.0])

        with pytest.raises(FamilyError, match="transverse"):
            build_family(spec, minkowski, inverse_metric)

    def test_missing_parameter(self, minkowski, inverse_metric):
        spec = FieldFamilySpec(family="plane_wave", pol=[0.0, 0.0, 1.0, 0.0])

        with pytest.raises(FamilyError, match="missing parameter"):
            build_family(spec, minkowski, inverse_metric)

    def test_potential_families_are_even_one_forms(self, minkowski):
        with pytest.raises(FamilyError):
            build_family(FieldFamilySpec(family="coulomb", grade=2), minkowski)

    @pytest.mark.parametrize("label", ["1,0", "0,9", "x"])
    def test_bad_component_labels(self, minkowski, label):
        with pytest.raises(FamilyError):
            coefficient_vector(minkowski, 2, {label: 1.0})
