"""Built-in field families (and seeded random forms) with analytic derivatives."""

from typing import Any, Dict, Mapping, Optional, Sequence

import numpy as np
import sympy

from oddforms.core.exceptions import FamilyError
from oddforms.core.logger import setup_logger
from oddforms.models.schemas import FieldFamilySpec
from oddforms.services.affine_forms import OffAxis, SmoothForm
from oddforms.services.exterior_algebra import GradedElement, Kind, Parity, SpaceDescriptor, tuple_positions
from oddforms.services.fields import ConstantField, ExpressionField, PolynomialField, coordinate_symbols

logger = setup_logger(__name__)


def _position(space: SpaceDescriptor, grade: int, label: str) -> int:
    try:
        indices = space.parse_tuple(label)
    except ValueError as e:
        raise FamilyError(f"bad component label '{label}': {e}")
    positions = tuple_positions(space.dim, grade)
    if indices not in positions:
        raise FamilyError(f"component '{label}' is not a strictly increasing {grade}-tuple")
    return positions[indices]


def coefficient_vector(space: SpaceDescriptor, grade: int, table: Mapping[str, float]) -> np.ndarray:
    values = np.zeros(space.size(grade))
    for label, value in table.items():
        values[_position(space, grade, label)] = float(value)
    return values


def zero_form(space: SpaceDescriptor, parity: Parity, grade: int) -> SmoothForm:
    return SmoothForm.zero(space, parity, grade)


def constant_form(space: SpaceDescriptor, parity: Parity, grade: int, table: Mapping[str, float]) -> SmoothForm:
    element = GradedElement(space, Kind.COVECTOR, parity, grade, coefficient_vector(space, grade, table))
    return SmoothForm(space, parity, grade, ConstantField(space.dim, element.coefficients), name="constant")


def polynomial_form(space: SpaceDescriptor, parity: Parity, grade: int, terms: Sequence[Mapping[str, Any]]) -> SmoothForm:
    """Terms {"component": "0,1", "coeff": c, "powers": [p_0, …, p_{m-1}]}."""
    coefficients = np.zeros((space.size(grade), max(len(terms), 1)))
    exponents = np.zeros((max(len(terms), 1), space.dim), dtype=int)
    for t, term in enumerate(terms):
        powers = list(term.get("powers", [0] * space.dim))
        if len(powers) != space.dim or any(int(p) != p or p < 0 for p in powers):
            raise FamilyError(f"term {t}: powers must be {space.dim} non-negative integers")
        coefficients[_position(space, grade, str(term.get("component", ""))), t] = float(term.get("coeff", 1.0))
        exponents[t] = powers
    return SmoothForm(space, parity, grade, PolynomialField(space.dim, coefficients, exponents), name="polynomial")


def constant_field_potential(space: SpaceDescriptor, field_strength: Mapping[str, float]) -> SmoothForm:
    """A = Σ_{μ<ν} F_{μν} x_μ e^ν, so that dA = Σ_{μ<ν} F_{μν} e^μ∧e^ν."""
    terms = []
    for label, value in field_strength.items():
        indices = space.parse_tuple(label)
        if len(indices) != 2 or indices[0] >= indices[1]:
            raise FamilyError(f"field strength component '{label}' is not an increasing pair")
        powers = [0] * space.dim
        powers[indices[0]] = 1
        terms.append({"component": space.format_tuple((indices[1],)), "coeff": value, "powers": powers})
    form = polynomial_form(space, Parity.EVEN, 1, terms)
    return SmoothForm(space, Parity.EVEN, 1, form.field, name="constant_field")


def plane_wave_potential(
    space: SpaceDescriptor,
    inverse_metric: np.ndarray,
    k: Sequence[float],
    pol: Sequence[float],
    amp: float = 1.0,
    phase: float = 0.0,
    tol: float = 1e-12,
) -> SmoothForm:
    """A = amp·cos(⟨k, x⟩ + phase)·pol with a null wave covector k and g⁻¹(k, pol) = 0."""
    k = np.asarray(k, dtype=float)
    pol = np.asarray(pol, dtype=float)
    if k.shape != (space.dim,) or pol.shape != (space.dim,):
        raise FamilyError(f"k and pol must have {space.dim} components")
    if abs(k @ inverse_metric @ k) > tol:
        raise FamilyError(f"wave covector k={k.tolist()} is not null: g⁻¹(k,k)={k @ inverse_metric @ k}")
    if abs(k @ inverse_metric @ pol) > tol:
        raise FamilyError(f"polarization is not transverse: g⁻¹(k,pol)={k @ inverse_metric @ pol}")
    x = coordinate_symbols(space.dim)
    wave = amp * sympy.cos(sum(float(k_mu) * x_mu for k_mu, x_mu in zip(k, x)) + phase)
    expressions = [float(p) * wave for p in pol]
    return SmoothForm(space, Parity.EVEN, 1, ExpressionField(space.dim, expressions, x), name="plane_wave")


def coulomb_potential(space: SpaceDescriptor, charge: float = 1.0) -> SmoothForm:
    """A = (q/r)·e⁰ with r the spatial distance; defined off the spatial origin."""
    x = coordinate_symbols(space.dim)
    radius = sympy.sqrt(sum(x_i**2 for x_i in x[1:]))
    expressions = [charge / radius] + [sympy.Integer(0)] * (space.dim - 1)
    domain = OffAxis(tuple(range(1, space.dim)))
    return SmoothForm(space, Parity.EVEN, 1, ExpressionField(space.dim, expressions, x), domain, name="coulomb")


def build_family(spec: FieldFamilySpec, space: SpaceDescriptor, inverse_metric: Optional[np.ndarray] = None) -> SmoothForm:
    """Instantiate a FieldFamilySpec as a form."""
    params: Dict[str, Any] = spec.parameters()
    parity = Parity(spec.parity)
    family = spec.family
    logger.debug(f"building field family {family} with {params}")
    try:
        if family == "zero":
            return zero_form(space, parity, spec.grade)
        if family == "constant":
            return constant_form(space, parity, spec.grade, params.get("coeffs", {}))
        if family == "polynomial":
            return polynomial_form(space, parity, spec.grade, params.get("terms", []))
        if spec.grade != 1 or parity is not Parity.EVEN:
            raise FamilyError(f"family '{family}' builds an even 1-form potential")
        if family == "constant_field":
            return constant_field_potential(space, params.get("F", {}))
        if family == "plane_wave":
            if inverse_metric is None:
                raise FamilyError("plane_wave needs a metric")
            return plane_wave_potential(
                space,
                inverse_metric,
                params["k"],
                params["pol"],
                float(params.get("amp", 1.0)),
                float(params.get("phase", 0.0)),
            )
        if family == "coulomb":
            return coulomb_potential(space, float(params.get("q", params.get("charge", 1.0))))
    except KeyError as e:
        raise FamilyError(f"family '{family}' is missing parameter {e}")
    except (TypeError, ValueError) as e:
        raise FamilyError(f"family '{family}': {e}")
    raise FamilyError(f"unknown family '{family}'")


def random_polynomial_form(
    rng: np.random.Generator,
    space: SpaceDescriptor,
    parity: Parity,
    grade: int,
    degree: int = 2,
    terms: int = 6,
) -> SmoothForm:
    """A polynomial form with `terms` random monomials of total degree ≤ `degree`."""
    coefficients = rng.uniform(-1.0, 1.0, size=(space.size(grade), terms))
    exponents = np.zeros((terms, space.dim), dtype=int)
    for t in range(terms):
        for _ in range(int(rng.integers(0, degree + 1))):
            exponents[t, int(rng.integers(0, space.dim))] += 1
    return SmoothForm(space, parity, grade, PolynomialField(space.dim, coefficients, exponents), name="random_polynomial")
