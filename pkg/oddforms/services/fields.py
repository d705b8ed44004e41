"""
Coefficient fields: vector-valued functions on the affine chart, evaluated on stacks of
points. Every field has a `gradient()` which is again a field; the gradient of a field
with n components has n·m components, component i·m + μ holding ∂_μ f_i.

Constant fields, polynomials, sympy expressions, constant linear maps, sums, stacks and
pointwise bilinear products propagate analytic gradients; everything else falls back to
central finite differences.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
import sympy

from oddforms.core.config import get_settings
from oddforms.core.exceptions import DimensionMismatchError, ShapeMismatchError
from oddforms.core.logger import setup_logger

logger = setup_logger(__name__)


def as_points(points: np.ndarray, dim: int) -> np.ndarray:
    points = np.asarray(points, dtype=float)
    if points.ndim == 1:
        points = points.reshape(1, -1)
    if points.shape[-1] != dim:
        raise DimensionMismatchError(dim, points.shape[-1])
    return points


class CoefficientField(ABC):
    """A map R^m → R^n evaluated on (N, m) point stacks."""

    def __init__(self, dim: int, size: int):
        self.dim = dim
        self.size = size
        self._gradient: Optional[CoefficientField] = None

    @abstractmethod
    def _evaluate(self, points: np.ndarray) -> np.ndarray:
        ...

    def _analytic_gradient(self) -> Optional["CoefficientField"]:
        return None

    def values(self, points: np.ndarray) -> np.ndarray:
        points = as_points(points, self.dim)
        result = np.asarray(self._evaluate(points), dtype=float)
        return result.reshape(points.shape[0], self.size)

    def __call__(self, point: Sequence[float]) -> np.ndarray:
        return self.values(np.asarray(point, dtype=float).reshape(1, self.dim))[0]

    @property
    def has_analytic_gradient(self) -> bool:
        return not isinstance(self.gradient(), FiniteDifferenceField)

    def gradient(self) -> "CoefficientField":
        if self._gradient is None:
            analytic = self._analytic_gradient()
            self._gradient = analytic if analytic is not None else FiniteDifferenceField(self)
        return self._gradient

    def __add__(self, other: "CoefficientField") -> "CoefficientField":
        return SumField([(1.0, self), (1.0, other)])

    def __sub__(self, other: "CoefficientField") -> "CoefficientField":
        return SumField([(1.0, self), (-1.0, other)])

    def __neg__(self) -> "CoefficientField":
        return SumField([(-1.0, self)])

    def scaled(self, factor: float) -> "CoefficientField":
        return SumField([(float(factor), self)])


class ConstantField(CoefficientField):
    def __init__(self, dim: int, value: Sequence[float]):
        value = np.array(value, dtype=float).reshape(-1)
        super().__init__(dim, value.size)
        self.value = value

    def _evaluate(self, points: np.ndarray) -> np.ndarray:
        return np.broadcast_to(self.value, (points.shape[0], self.size))

    def _analytic_gradient(self) -> CoefficientField:
        return ConstantField(self.dim, np.zeros(self.size * self.dim))


class PolynomialField(CoefficientField):
    """f_i(x) = Σ_t C[i, t] Π_μ x_μ^{E[t, μ]}."""

    def __init__(self, dim: int, coefficients: np.ndarray, exponents: np.ndarray):
        coefficients = np.array(coefficients, dtype=float)
        exponents = np.array(exponents, dtype=int).reshape(-1, dim)
        if coefficients.ndim != 2 or coefficients.shape[1] != exponents.shape[0]:
            raise ShapeMismatchError((coefficients.shape[0], exponents.shape[0]), coefficients.shape)
        if np.any(exponents < 0):
            raise ValueError("polynomial exponents must be non-negative")
        super().__init__(dim, coefficients.shape[0])
        self.coefficients = coefficients
        self.exponents = exponents

    def _evaluate(self, points: np.ndarray) -> np.ndarray:
        monomials = np.prod(points[:, None, :] ** self.exponents[None, :, :], axis=2)
        return monomials @ self.coefficients.T

    def _analytic_gradient(self) -> CoefficientField:
        n, terms, m = self.size, self.exponents.shape[0], self.dim
        exponents = np.repeat(self.exponents, m, axis=0)
        coefficients = np.zeros((n * m, terms * m))
        for mu in range(m):
            rows = np.arange(terms) * m + mu
            exponents[rows, mu] = np.maximum(exponents[rows, mu] - 1, 0)
            for i in range(n):
                coefficients[i * m + mu, rows] = self.coefficients[i] * self.exponents[:, mu]
        return PolynomialField(m, coefficients, exponents)


class ExpressionField(CoefficientField):
    """Components given as sympy expressions in the coordinate symbols x0 … x_{m-1}."""

    def __init__(self, dim: int, expressions: Sequence[sympy.Expr], symbols: Optional[Sequence[sympy.Symbol]] = None):
        super().__init__(dim, len(expressions))
        self.symbols = tuple(symbols) if symbols is not None else coordinate_symbols(dim)
        self.expressions = tuple(sympy.sympify(expression) for expression in expressions)
        self._functions = [sympy.lambdify(self.symbols, expression, "numpy") for expression in self.expressions]

    def _evaluate(self, points: np.ndarray) -> np.ndarray:
        columns = [points[:, mu] for mu in range(self.dim)]
        result = np.empty((points.shape[0], self.size))
        for i, function in enumerate(self._functions):
            result[:, i] = np.broadcast_to(function(*columns), (points.shape[0],))
        return result

    def _analytic_gradient(self) -> CoefficientField:
        derivatives = [sympy.diff(expression, symbol) for expression in self.expressions for symbol in self.symbols]
        return ExpressionField(self.dim, derivatives, self.symbols)


def coordinate_symbols(dim: int) -> Tuple[sympy.Symbol, ...]:
    return tuple(sympy.symbols(f"x0:{dim}", real=True))


class LinearMapField(CoefficientField):
    """x ↦ T f(x) for a constant matrix T."""

    def __init__(self, matrix: np.ndarray, inner: CoefficientField):
        matrix = np.array(matrix, dtype=float)
        if matrix.ndim != 2 or matrix.shape[1] != inner.size:
            raise ShapeMismatchError((matrix.shape[0], inner.size), matrix.shape)
        super().__init__(inner.dim, matrix.shape[0])
        self.matrix = matrix
        self.inner = inner

    def _evaluate(self, points: np.ndarray) -> np.ndarray:
        return self.inner.values(points) @ self.matrix.T

    def _analytic_gradient(self) -> Optional[CoefficientField]:
        inner = self.inner.gradient()
        if isinstance(inner, FiniteDifferenceField):
            return None
        return LinearMapField(np.kron(self.matrix, np.eye(self.dim)), inner)


class SumField(CoefficientField):
    def __init__(self, terms: Sequence[Tuple[float, CoefficientField]]):
        terms = [(float(weight), term) for weight, term in terms]
        first = terms[0][1]
        for _, term in terms:
            if term.dim != first.dim:
                raise DimensionMismatchError(first.dim, term.dim)
            if term.size != first.size:
                raise ShapeMismatchError((first.size,), (term.size,))
        super().__init__(first.dim, first.size)
        self.terms = terms

    def _evaluate(self, points: np.ndarray) -> np.ndarray:
        total = np.zeros((points.shape[0], self.size))
        for weight, term in self.terms:
            total = total + weight * term.values(points)
        return total

    def _analytic_gradient(self) -> Optional[CoefficientField]:
        gradients = [(weight, term.gradient()) for weight, term in self.terms]
        if any(isinstance(gradient, FiniteDifferenceField) for _, gradient in gradients):
            return None
        return SumField(gradients)


class StackField(CoefficientField):
    """Concatenation of the components of several fields."""

    def __init__(self, parts: Sequence[CoefficientField]):
        parts = list(parts)
        super().__init__(parts[0].dim, sum(part.size for part in parts))
        self.parts = parts

    def _evaluate(self, points: np.ndarray) -> np.ndarray:
        return np.concatenate([part.values(points) for part in self.parts], axis=1)

    def _analytic_gradient(self) -> Optional[CoefficientField]:
        gradients = [part.gradient() for part in self.parts]
        if any(isinstance(gradient, FiniteDifferenceField) for gradient in gradients):
            return None
        return StackField(gradients)


class BilinearField(CoefficientField):
    """x ↦ Σ_ij T[k, i, j] l_i(x) r_j(x) for a constant tensor T."""

    def __init__(self, tensor: np.ndarray, left: CoefficientField, right: CoefficientField):
        tensor = np.asarray(tensor, dtype=float)
        if tensor.shape[1:] != (left.size, right.size):
            raise ShapeMismatchError((tensor.shape[0], left.size, right.size), tensor.shape)
        if left.dim != right.dim:
            raise DimensionMismatchError(left.dim, right.dim)
        super().__init__(left.dim, tensor.shape[0])
        self.tensor = tensor
        self.left = left
        self.right = right

    def _evaluate(self, points: np.ndarray) -> np.ndarray:
        return np.einsum("kij,ni,nj->nk", self.tensor, self.left.values(points), self.right.values(points))

    def _analytic_gradient(self) -> Optional[CoefficientField]:
        left_gradient, right_gradient = self.left.gradient(), self.right.gradient()
        if isinstance(left_gradient, FiniteDifferenceField) or isinstance(right_gradient, FiniteDifferenceField):
            return None
        m = self.dim
        k, n_left, n_right = self.tensor.shape
        identity = np.eye(m)
        # product rule: (∂l) r + l (∂r), with μ carried alongside k
        on_left = np.einsum("kij,mn->kminj", self.tensor, identity).reshape(k * m, n_left * m, n_right)
        on_right = np.einsum("kij,mn->kmijn", self.tensor, identity).reshape(k * m, n_left, n_right * m)
        return SumField(
            [
                (1.0, BilinearField(on_left, left_gradient, self.right)),
                (1.0, BilinearField(on_right, self.left, right_gradient)),
            ]
        )


class PointwiseLinearField(CoefficientField):
    """x ↦ M(x) f(x) where M is itself a field holding a row-major (k × n) matrix."""

    def __init__(self, matrix: CoefficientField, inner: CoefficientField, rows: int):
        if matrix.size != rows * inner.size:
            raise ShapeMismatchError((rows * inner.size,), (matrix.size,))
        super().__init__(inner.dim, rows)
        self.matrix = matrix
        self.inner = inner

    def _evaluate(self, points: np.ndarray) -> np.ndarray:
        matrices = self.matrix.values(points).reshape(points.shape[0], self.size, self.inner.size)
        return np.einsum("nki,ni->nk", matrices, self.inner.values(points))

    def _analytic_gradient(self) -> Optional[CoefficientField]:
        matrix_gradient, inner_gradient = self.matrix.gradient(), self.inner.gradient()
        if isinstance(matrix_gradient, FiniteDifferenceField) or isinstance(inner_gradient, FiniteDifferenceField):
            return None
        k, n, m = self.size, self.inner.size, self.dim
        # ∂_μ M laid out as a (k·m × n) matrix: entry ((k·m + μ)·n + i) ← ((k·n + i)·m + μ)
        permutation = np.zeros((k * m * n, k * n * m))
        # M ⊗ I_m as a (k·m × n·m) matrix: entry ((k·m + μ)·n·m + i·m + μ) ← (k·n + i)
        spread = np.zeros((k * m * n * m, k * n))
        for row in range(k):
            for column in range(n):
                for mu in range(m):
                    permutation[(row * m + mu) * n + column, (row * n + column) * m + mu] = 1.0
                    spread[(row * m + mu) * n * m + column * m + mu, row * n + column] = 1.0
        return SumField(
            [
                (1.0, PointwiseLinearField(LinearMapField(permutation, matrix_gradient), self.inner, k * m)),
                (1.0, PointwiseLinearField(LinearMapField(spread, self.matrix), inner_gradient, k * m)),
            ]
        )


class FiniteDifferenceField(CoefficientField):
    """Central-difference gradient of another field with step h."""

    def __init__(self, inner: CoefficientField, step: Optional[float] = None):
        super().__init__(inner.dim, inner.size * inner.dim)
        self.inner = inner
        self.step = float(step if step is not None else get_settings().fd_step)

    def _evaluate(self, points: np.ndarray) -> np.ndarray:
        n, m = self.inner.size, self.dim
        result = np.empty((points.shape[0], n, m))
        for mu in range(m):
            offset = np.zeros(m)
            offset[mu] = self.step
            forward = self.inner.values(points + offset)
            backward = self.inner.values(points - offset)
            result[:, :, mu] = (forward - backward) / (2.0 * self.step)
        return result.reshape(points.shape[0], n * m)


class CallableField(CoefficientField):
    """
    A field from a plain function (N, m) → (N, n), with an optional analytic gradient
    given either as a field or as another function (N, m) → (N, n·m).
    """

    def __init__(
        self,
        dim: int,
        size: int,
        function: Callable[[np.ndarray], np.ndarray],
        gradient: Optional[object] = None,
    ):
        super().__init__(dim, size)
        self.function = function
        self.supplied_gradient = gradient

    def _evaluate(self, points: np.ndarray) -> np.ndarray:
        return self.function(points)

    def _analytic_gradient(self) -> Optional[CoefficientField]:
        if self.supplied_gradient is None:
            return None
        if isinstance(self.supplied_gradient, CoefficientField):
            return self.supplied_gradient
        return CallableField(self.dim, self.size * self.dim, self.supplied_gradient)
