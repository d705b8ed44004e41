from typing import Any, Dict, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


# Graded elements
class GradedElementSchema(BaseModel):
    kind: Literal["covector", "vector"]
    parity: Literal["even", "odd"]
    grade: int = Field(ge=0)
    dim: int = Field(ge=1)
    coeffs: Dict[str, float] = {}
    first_label: int = 1  # 0 for Minkowski labelling

    @model_validator(mode="after")
    def _grade_fits(self) -> "GradedElementSchema":
        if self.grade > self.dim:
            raise ValueError(f"grade {self.grade} exceeds dim {self.dim}")
        return self


class TensorSchema(BaseModel):
    """A tensor w ⊗ e in normal form"""

    w: GradedElementSchema
    e: GradedElementSchema


# Field families
class FieldFamilySpec(BaseModel):
    """
    A named field family. Parameters may be given under ``params`` or inline,
    e.g. {"family": "plane_wave", "k": [1, 1, 0, 0], "pol": [0, 0, 1, 0], "amp": 1.0}
    """

    model_config = ConfigDict(extra="allow")

    family: Literal["zero", "constant", "constant_field", "polynomial", "plane_wave", "coulomb"]
    parity: Literal["even", "odd"] = "even"
    grade: int = Field(default=1, ge=0)
    params: Dict[str, Any] = {}

    def parameters(self) -> Dict[str, Any]:
        return {**(self.model_extra or {}), **self.params}


class CubeDomainSpec(BaseModel):
    min: List[float]
    max: List[float]

    @model_validator(mode="after")
    def _is_box(self) -> "CubeDomainSpec":
        if len(self.min) != len(self.max):
            raise ValueError("min and max must have the same length")
        if any(low >= high for low, high in zip(self.min, self.max)):
            raise ValueError("every min entry must be below the matching max entry")
        return self


class DiracSpec(BaseModel):
    point: List[float]
    w: GradedElementSchema


class QuadraticDensitySpec(BaseModel):
    """Constant polarization blocks as dense row-major arrays"""

    model_config = ConfigDict(populate_by_name=True)

    lambda_: List[List[float]] = Field(alias="lambda")
    mu: List[List[float]]
    nu: List[List[float]]
    dependence: Literal["constant"] = "constant"
    dim: int = Field(default=4, ge=1)


class TrajectorySpec(BaseModel):
    """(A, G, J) triple built from families; G and J may be derived from A"""

    A: FieldFamilySpec
    G: Union[Literal["from_constitutive", "zero"], FieldFamilySpec] = "from_constitutive"
    J: Union[Literal["from_maxwell", "zero"], FieldFamilySpec] = "zero"
    G_perturbation: Optional[Dict[str, float]] = None  # constant odd 2-form added to G
    J_perturbation: Optional[Dict[str, float]] = None  # constant odd 3-form added to J
    region: Optional[CubeDomainSpec] = None
    points: Optional[List[List[float]]] = None
    w: Optional[GradedElementSchema] = None

    @field_validator("points")
    @classmethod
    def _points_are_4d(cls, value: Optional[List[List[float]]]) -> Optional[List[List[float]]]:
        if value is not None and any(len(point) != 4 for point in value):
            raise ValueError("sample points must have 4 coordinates")
        return value


# Reports
class CheckRecord(BaseModel):
    name: str
    value: float
    tolerance: float
    passed: bool
    detail: Optional[str] = None


class Report(BaseModel):
    suite: str
    checks: List[CheckRecord] = []
    passed: bool = True
    version: str
    config: Dict[str, Any] = {}

    @model_validator(mode="after")
    def _aggregate(self) -> "Report":
        self.passed = all(check.passed for check in self.checks)
        return self


class VerdictRecord(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    interior_residual: float
    boundary_residual: float
    passed: bool = Field(alias="pass")


class PointVerdict(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    point: List[float]
    constitutive_residual: float
    maxwell_residual: float
    principle_residual: Optional[float] = None
    passed: bool = Field(alias="pass")
