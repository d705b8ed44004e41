from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict
from functools import lru_cache
from pathlib import Path
from typing import List, Optional

# Repository root (parent of the package directory)
BASE_DIR = Path(__file__).resolve().parent.parent.parent
ENV_FILE = BASE_DIR / ".env"


class Settings(BaseSettings):
    # App Settings
    app_name: str = "oddforms"
    debug: bool = False

    # Physics
    c_light: float = Field(default=1.0, gt=0)
    metric: List[float] = [1.0, -1.0, -1.0, -1.0]

    # Numerics
    quad_order: int = Field(default=8, ge=1)
    fd_step: float = Field(default=1e-5, gt=0)
    variation_step: float = Field(default=1e-3, gt=0)

    # Tolerances
    tol_algebra: float = Field(default=1e-12, gt=0)
    tol_quad: float = Field(default=1e-6, gt=0)
    tol_residual: float = Field(default=1e-8, gt=0)

    # Reproducibility / output
    seed: int = 42
    report_path: Optional[str] = None

    model_config = SettingsConfigDict(
        env_file=str(ENV_FILE),
        env_prefix="ODDFORMS_",
        case_sensitive=False,
        env_file_encoding="utf-8",
        extra="ignore",
    )

    @field_validator("metric")
    @classmethod
    def _metric_is_nondegenerate(cls, value: List[float]) -> List[float]:
        if any(entry == 0 for entry in value):
            raise ValueError("metric diagonal entries must be non-zero")
        return value

    def with_overrides(self, **overrides) -> "Settings":
        """Return a copy with the non-None overrides applied (CLI flags win over env)."""
        update = {key: value for key, value in overrides.items() if value is not None}
        if not update:
            return self
        return self.model_validate({**self.model_dump(), **update})


@lru_cache()
def get_settings() -> Settings:
    return Settings()
