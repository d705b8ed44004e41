# tests/services/test_fields.py

import numpy as np
import pytest
import sympy

from oddforms.core.exceptions import DimensionMismatchError, ShapeMismatchError
from oddforms.services.fields import (
    BilinearField,
    CallableField,
    ConstantField,
    ExpressionField,
    FiniteDifferenceField,
    LinearMapField,
    PointwiseLinearField,
    PolynomialField,
    StackField,
    coordinate_symbols,
)


@pytest.fixture
def points():
    """A handful of sample points in R³."""
    return np.random.default_rng(3).uniform(-1.0, 1.0, size=(6, 3))


@pytest.fixture
def polynomial():
    """f = (x0²x1 - 2x2, 3 + x1x2)."""
    coefficients = np.array([[1.0, -2.0, 0.0, 0.0], [0.0, 0.0, 3.0, 1.0]])
    exponents = np.array([[2, 1, 0], [0, 0, 1], [0, 0, 0], [0, 1, 1]])
    return PolynomialField(3, coefficients, exponents)


def assert_gradient_matches_differences(field, points, atol=1e-7):
    analytic = field.gradient().values(points)
    numeric = FiniteDifferenceField(field, step=1e-5).values(points)
    np.testing.assert_allclose(analytic, numeric, atol=atol)


class TestPolynomialField:
    def test_values(self, polynomial):
        x = np.array([2.0, 3.0, 5.0])

        np.testing.assert_allclose(polynomial(x), [2.0**2 * 3.0 - 10.0, 3.0 + 15.0])

    def test_gradient_layout(self, polynomial):
        """Component i·m + μ holds ∂_μ f_i."""
        gradient = polynomial.gradient()(np.array([2.0, 3.0, 5.0]))

        np.testing.assert_allclose(gradient, [12.0, 4.0, -2.0, 0.0, 5.0, 3.0])
        assert polynomial.has_analytic_gradient

    def test_gradient_matches_differences(self, polynomial, points):
        assert_gradient_matches_differences(polynomial, points)

    def test_negative_exponents_are_rejected(self):
        with pytest.raises(ValueError):
            PolynomialField(2, np.ones((1, 1)), np.array([[-1, 0]]))


class TestExpressionField:
    def test_symbolic_gradient(self, points):
        x = coordinate_symbols(3)
        field = ExpressionField(3, [sympy.sin(x[0] * x[1]), sympy.exp(x[2]) * x[0]], x)

        assert field.has_analytic_gradient
        assert_gradient_matches_differences(field, points)

    def test_constant_expression_broadcasts(self, points):
        field = ExpressionField(3, [sympy.Integer(4)])

        np.testing.assert_allclose(field.values(points), np.full((6, 1), 4.0))


class TestComposites:
    def test_linear_map_gradient(self, polynomial, points):
        field = LinearMapField(np.array([[1.0, 2.0], [0.0, -1.0], [3.0, 3.0]]), polynomial)

        assert field.size == 3
        assert_gradient_matches_differences(field, points)

    def test_bilinear_gradient(self, polynomial, points):
        tensor = np.random.default_rng(0).uniform(-1.0, 1.0, size=(2, 2, 2))
        field = BilinearField(tensor, polynomial, polynomial.scaled(0.5))

        assert field.has_analytic_gradient
        assert_gradient_matches_differences(field, points, atol=1e-6)

    def test_pointwise_linear_gradient(self, polynomial, points):
        x = coordinate_symbols(3)
        matrix = ExpressionField(3, [x[0], 1, x[1] * x[2], -x[0], 2, x[2]], x)
        field = PointwiseLinearField(matrix, polynomial, 3)

        assert field.has_analytic_gradient
        assert_gradient_matches_differences(field, points, atol=1e-6)

    def test_stack_and_sum(self, polynomial, points):
        stacked = StackField([polynomial, ConstantField(3, [1.0])])
        difference = polynomial - polynomial

        assert stacked.size == 3
        np.testing.assert_allclose(difference.values(points), 0.0)

    def test_sum_rejects_mismatched_sizes(self, polynomial):
        with pytest.raises(ShapeMismatchError):
            polynomial + ConstantField(3, [1.0])

    def test_points_of_wrong_dimension_are_rejected(self, polynomial):
        with pytest.raises(DimensionMismatchError):
            polynomial.values(np.zeros((2, 4)))


class TestFallback:
    def test_callable_without_gradient_uses_differences(self, points):
        field = CallableField(3, 1, lambda p: (p[:, 0] ** 2).reshape(-1, 1))

        assert not field.has_analytic_gradient
        np.testing.assert_allclose(field.gradient().values(points)[:, 0], 2.0 * points[:, 0], atol=1e-8)

    def test_callable_with_gradient_function(self, points):
        field = CallableField(
            3,
            1,
            lambda p: (p[:, 0] * p[:, 1]).reshape(-1, 1),
            lambda p: np.stack([p[:, 1], p[:, 0], np.zeros(len(p))], axis=1),
        )

        assert field.has_analytic_gradient
        assert_gradient_matches_differences(field, points)

    def test_composite_over_callable_loses_analytic_gradient(self, points):
        inner = CallableField(3, 1, lambda p: np.sin(p[:, :1]))

        assert not LinearMapField(np.array([[2.0]]), inner).has_analytic_gradient
