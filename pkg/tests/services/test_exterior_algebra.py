# tests/services/test_exterior_algebra.py

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from oddforms.core.exceptions import (
    DimensionMismatchError,
    GradeOverflowError,
    KindMismatchError,
    ParityMismatchError,
    ShapeMismatchError,
)
from oddforms.services.exterior_algebra import (
    GradedElement,
    Kind,
    Orientation,
    Parity,
    SpaceDescriptor,
    covector,
    evaluate,
    interior_left,
    interior_right,
    pair,
    permutation_sign,
    reorient,
    simple_vector,
    vector,
    volume_covector,
    wedge,
)

unit_floats = st.floats(min_value=-1.0, max_value=1.0, allow_nan=False, allow_infinity=False)


@st.composite
def elements(draw, dim, grade, kind=Kind.COVECTOR, parity=None):
    """Draws a graded element with coefficients in [-1, 1]."""
    space = SpaceDescriptor(dim)
    parity = parity or draw(st.sampled_from([Parity.EVEN, Parity.ODD]))
    values = draw(arrays(np.float64, space.size(grade), elements=unit_floats))
    return GradedElement(space, kind, parity, grade, values)


@st.composite
def wedge_triples(draw):
    """Three covectors whose grades fit together in one space."""
    dim = draw(st.integers(min_value=2, max_value=5))
    p = draw(st.integers(min_value=0, max_value=dim))
    q = draw(st.integers(min_value=0, max_value=dim - p))
    r = draw(st.integers(min_value=0, max_value=dim - p - q))
    return draw(elements(dim, p)), draw(elements(dim, q)), draw(elements(dim, r))


@pytest.fixture
def plane():
    """The oriented plane R² with labels 1, 2."""
    return SpaceDescriptor(2)


@pytest.fixture
def space4():
    """Four dimensions with labels 1..4."""
    return SpaceDescriptor(4)


class TestConstruction:
    def test_from_mapping_normalizes_by_permutation_sign(self, space4):
        """
        GIVEN an unsorted index tuple
        WHEN the element is built
        THEN the coefficient is stored on the sorted tuple with the shuffle sign.
        """
        element = covector(space4, {(2, 0, 1): 3.0}, 3)

        assert element.coefficient((0, 1, 2)) == 3.0
        assert element.coefficient((1, 0, 2)) == -3.0
        assert element.coefficient((0, 0, 2)) == 0.0

    def test_repeated_indices_vanish(self, space4):
        element = covector(space4, {(1, 1): 5.0}, 2)

        assert element.is_zero()

    def test_wrong_coefficient_count_is_rejected(self, space4):
        with pytest.raises(ShapeMismatchError):
            GradedElement(space4, Kind.COVECTOR, Parity.EVEN, 2, np.zeros(5))

    def test_grade_above_dimension_is_rejected(self, plane):
        with pytest.raises(GradeOverflowError):
            GradedElement(plane, Kind.VECTOR, Parity.EVEN, 3, np.zeros(0))

    def test_json_uses_labels_of_the_space(self):
        """
        GIVEN a Minkowski-labelled 2-covector
        WHEN it is serialized and read back
        THEN keys carry the 0-based labels and the value survives.
        """
        minkowski = SpaceDescriptor.minkowski()
        element = covector(minkowski, {(0, 1): 2.5}, 2)

        data = element.to_json()
        restored = GradedElement.from_json(data)

        assert data["coeffs"]["0,1"] == 2.5
        assert data["first_label"] == 0
        assert restored.allclose(element)

    def test_json_rejects_non_increasing_keys(self):
        data = {"kind": "covector", "parity": "even", "grade": 2, "dim": 3, "coeffs": {"2,1": 1.0}}

        with pytest.raises(ValueError):
            GradedElement.from_json(data)


class TestArithmetic:
    def test_addition_requires_matching_parity(self, space4):
        even = covector(space4, {(0,): 1.0}, 1)
        odd = covector(space4, {(0,): 1.0}, 1, Parity.ODD)

        with pytest.raises(ParityMismatchError):
            even + odd

    def test_numpy_scalar_on_the_left_keeps_the_element(self, space4):
        element = covector(space4, {(0,): 1.0}, 1)

        scaled = np.float64(2.0) * element

        assert isinstance(scaled, GradedElement)
        assert scaled.coefficient((0,)) == 2.0


class TestWedge:
    def test_basis_products(self, plane):
        """
        GIVEN e¹ and e² in the plane
        WHEN wedged in both orders
        THEN e¹∧e² = e^{12} and e²∧e¹ = -e^{12}.
        """
        e1 = covector(plane, {(0,): 1.0}, 1)
        e2 = covector(plane, {(1,): 1.0}, 1)

        assert wedge(e1, e2).coefficient((0, 1)) == 1.0
        assert wedge(e2, e1).coefficient((0, 1)) == -1.0
        assert wedge(e1, e1).is_zero()

    def test_parity_multiplies(self, space4):
        odd = covector(space4, {(0,): 1.0}, 1, Parity.ODD)
        also_odd = covector(space4, {(1,): 1.0}, 1, Parity.ODD)

        assert wedge(odd, also_odd).parity is Parity.EVEN
        assert wedge(odd, covector(space4, {(2,): 1.0}, 1)).parity is Parity.ODD

    def test_overflow_is_rejected(self, plane):
        a = covector(plane, {(0, 1): 1.0}, 2)

        with pytest.raises(GradeOverflowError):
            wedge(a, covector(plane, {(0,): 1.0}, 1))

    def test_mixed_kinds_are_rejected(self, plane):
        with pytest.raises(KindMismatchError):
            wedge(covector(plane, {(0,): 1.0}, 1), vector(plane, {(1,): 1.0}, 1))

    def test_dimension_mismatch_is_rejected(self, plane, space4):
        with pytest.raises(DimensionMismatchError):
            wedge(covector(plane, {(0,): 1.0}, 1), covector(space4, {(1,): 1.0}, 1))

    @settings(max_examples=60, deadline=None)
    @given(wedge_triples())
    def test_associative(self, triple):
        x, y, z = triple

        left = wedge(wedge(x, y), z)
        right = wedge(x, wedge(y, z))

        np.testing.assert_allclose(left.coefficients, right.coefficients, atol=1e-12)

    @settings(max_examples=60, deadline=None)
    @given(wedge_triples())
    def test_graded_commutative(self, triple):
        x, y, _ = triple

        sign = (-1) ** (x.grade * y.grade)

        np.testing.assert_allclose(wedge(x, y).coefficients, sign * wedge(y, x).coefficients, atol=1e-12)


class TestPairingAndInterior:
    def test_pairing_requires_matching_parity(self, space4):
        a = covector(space4, {(0,): 1.0}, 1)
        w = vector(space4, {(0,): 1.0}, 1, Parity.ODD)

        with pytest.raises(ParityMismatchError):
            pair(a, w)

    def test_pairing_is_the_dot_product(self, space4):
        a = covector(space4, {(0, 1): 2.0, (2, 3): -1.0}, 2)
        w = vector(space4, {(0, 1): 3.0, (2, 3): 4.0}, 2)

        assert pair(a, w) == pytest.approx(2.0)

    @settings(max_examples=50, deadline=None)
    @given(st.data())
    def test_left_interior_adjunction(self, data):
        """⟨w ⌟ a, w′⟩ = ⟨a, w ∧ w′⟩."""
        dim = data.draw(st.integers(min_value=2, max_value=5))
        q = data.draw(st.integers(min_value=1, max_value=dim))
        p = data.draw(st.integers(min_value=0, max_value=q))
        w = data.draw(elements(dim, p, Kind.VECTOR, Parity.EVEN))
        a = data.draw(elements(dim, q, Kind.COVECTOR, Parity.EVEN))
        w_prime = data.draw(elements(dim, q - p, Kind.VECTOR, Parity.EVEN))

        assert pair(interior_left(w, a), w_prime) == pytest.approx(pair(a, wedge(w, w_prime)), abs=1e-12)

    @settings(max_examples=50, deadline=None)
    @given(st.data())
    def test_right_interior_adjunction(self, data):
        """⟨a′, w ⌞ a⟩ = ⟨a′ ∧ a, w⟩."""
        dim = data.draw(st.integers(min_value=2, max_value=5))
        q = data.draw(st.integers(min_value=1, max_value=dim))
        p = data.draw(st.integers(min_value=0, max_value=q))
        w = data.draw(elements(dim, q, Kind.VECTOR, Parity.EVEN))
        a = data.draw(elements(dim, p, Kind.COVECTOR, Parity.EVEN))
        a_prime = data.draw(elements(dim, q - p, Kind.COVECTOR, Parity.EVEN))

        result = interior_right(w, a)

        assert result.kind is Kind.VECTOR
        assert pair(a_prime, result) == pytest.approx(pair(wedge(a_prime, a), w), abs=1e-12)


class TestOrientation:
    def test_odd_elements_flip_under_reversal(self, space4):
        odd = volume_covector(space4)
        even = covector(space4, {(0, 1, 2, 3): 1.0}, 4)
        reversed_orientation = Orientation(1).reversed()

        assert reorient(odd, reversed_orientation)[0] == -1.0
        assert reorient(even, reversed_orientation)[0] == 1.0

    def test_evaluation_on_the_standard_basis(self, space4):
        """
        GIVEN the odd volume covector
        WHEN evaluated on e_1..e_4 at both orientations
        THEN it gives +1 and -1.
        """
        volume = volume_covector(space4)

        assert evaluate(volume, np.eye(4)) == pytest.approx(1.0)
        assert evaluate(volume, np.eye(4), Orientation(-1)) == pytest.approx(-1.0)

    def test_simple_vector_matches_wedge_of_vectors(self, space4):
        vectors = np.array([[1.0, 2.0, 0.0, 1.0], [0.0, 1.0, 3.0, -1.0]])
        first = GradedElement(space4, Kind.VECTOR, Parity.EVEN, 1, vectors[0])
        second = GradedElement(space4, Kind.VECTOR, Parity.EVEN, 1, vectors[1])

        assert simple_vector(space4, vectors).allclose(wedge(first, second))

    def test_permutation_sign(self):
        assert permutation_sign((0, 1, 2)) == 1
        assert permutation_sign((1, 0, 2)) == -1
        assert permutation_sign((2, 0, 1)) == 1
        assert permutation_sign((1, 1)) == 0
