import argparse
import json
from pathlib import Path
from typing import Any, Optional, Tuple, Type, TypeVar

from pydantic import BaseModel, ValidationError

from oddforms.core.config import Settings, get_settings
from oddforms.core.exceptions import EXIT_CHECKS_FAILED, EXIT_PASS, ConfigurationError, InputValidationError
from oddforms.core.logger import setup_logger
from oddforms.models.schemas import Report

logger = setup_logger(__name__)

ModelT = TypeVar("ModelT", bound=BaseModel)


def add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=None, help="seed for every random probe")
    parser.add_argument("--c-light", dest="c_light", type=float, default=None, help="speed of light c")
    parser.add_argument("--quad-order", dest="quad_order", type=int, default=None, help="Gauss-Legendre order per axis")
    parser.add_argument("--tol-algebra", dest="tol_algebra", type=float, default=None)
    parser.add_argument("--tol-quad", dest="tol_quad", type=float, default=None)
    parser.add_argument("--tol-residual", dest="tol_residual", type=float, default=None)
    parser.add_argument("--out", default=None, help="write the full JSON report here")
    parser.add_argument("--debug", action="store_true", default=None, help="log at DEBUG level")


def settings_from_args(args: argparse.Namespace) -> Settings:
    """Flags override environment and .env values."""
    try:
        return get_settings().with_overrides(
            seed=args.seed,
            c_light=args.c_light,
            quad_order=args.quad_order,
            tol_algebra=args.tol_algebra,
            tol_quad=args.tol_quad,
            tol_residual=args.tol_residual,
            report_path=args.out,
            debug=args.debug,
        )
    except ValidationError as e:
        error = e.errors()[0]
        raise ConfigurationError(f"--{'-'.join(str(part) for part in error['loc'])}: {error['msg']}")


def read_json(path: str) -> Any:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise InputValidationError(path, "file", e.strerror or str(e))
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise InputValidationError(path, f"line {e.lineno} column {e.colno}", e.msg)


def first_error(error: ValidationError) -> Tuple[str, str]:
    """(location, message) of the first validation error."""
    first = error.errors()[0]
    return ".".join(str(part) for part in first["loc"]) or "<root>", first["msg"]


def load_model(path: str, model: Type[ModelT]) -> ModelT:
    """Parse a JSON file into a schema; the first validation error becomes the reported location."""
    data = read_json(path)
    try:
        return model.model_validate(data)
    except ValidationError as e:
        raise InputValidationError(path, *first_error(e))


def dump_json(payload: Any) -> str:
    return json.dumps(payload, sort_keys=True, indent=2)


def write_output(payload: Any, path: Optional[str]) -> None:
    if path is None:
        return
    Path(path).write_text(dump_json(payload) + "\n", encoding="utf-8")
    logger.debug(f"wrote {path}")


def finish_report(report: Report, settings: Settings) -> int:
    """Print one line per check and the verdict, write the report, and return the exit code."""
    for check in report.checks:
        status = "PASS" if check.passed else "FAIL"
        line = f"{status} {check.name}: {check.value:.3e} (tolerance {check.tolerance:.1e})"
        if check.detail and not check.passed:
            line += f" - {check.detail}"
        print(line)
    print(f"{report.suite}: {'PASS' if report.passed else 'FAIL'} ({sum(c.passed for c in report.checks)}/{len(report.checks)})")
    write_output(report.model_dump(mode="json"), settings.report_path)
    return EXIT_PASS if report.passed else EXIT_CHECKS_FAILED
