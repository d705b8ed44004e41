import argparse
from typing import List

import numpy as np

from oddforms import __version__
from oddforms.cli.common import add_common_flags, finish_report, load_model
from oddforms.core.config import Settings
from oddforms.core.exceptions import ConfigurationError
from oddforms.core.logger import setup_logger
from oddforms.models.schemas import CheckRecord, CubeDomainSpec, Report, TrajectorySpec
from oddforms.services.affine_forms import CubeDomain, SmoothForm
from oddforms.services.electrodynamics import ElectrodynamicsService, MinkowskiStructure, Trajectory
from oddforms.services.exterior_algebra import GradedElement
from oddforms.services.verification import RANDOM_SAMPLE_POINTS

logger = setup_logger(__name__)

MODES = ("el", "maxwell", "compact", "infinitesimal", "hamilton")


def register(subparsers) -> None:
    parser = subparsers.add_parser("residual", help="field-equation residuals and verdicts for a trajectory")
    parser.add_argument("path", help="trajectory JSON")
    parser.add_argument("--mode", required=True, choices=MODES)
    parser.add_argument("--region", default=None, help="box JSON {min, max}; required by --mode compact unless the trajectory has one")
    add_common_flags(parser)
    parser.set_defaults(handler=handle)


def _sup(form: SmoothForm, points: np.ndarray) -> float:
    return float(np.max(np.abs(form.coefficients(points))))


def _record(name: str, value: float, tolerance: float, detail: str) -> CheckRecord:
    passed = bool(np.isfinite(value) and value <= tolerance)
    return CheckRecord(name=name, value=value, tolerance=tolerance, passed=passed, detail=None if passed else detail)


def _point_checks(
    service: ElectrodynamicsService, trajectory: Trajectory, points: np.ndarray, w, mode: str, tol: float
) -> List[CheckRecord]:
    checks = []
    for index, x in enumerate(points):
        if mode == "infinitesimal":
            verdict = service.infinitesimal_check(trajectory, x, w, tol)
            checks += [
                _record(f"infinitesimal[{index}].constitutive", verdict.constitutive_residual, tol, "G(x) = Λ F(x) violated"),
                _record(f"infinitesimal[{index}].maxwell", verdict.maxwell_residual, tol, "dG(x) = (4π/c) J(x) violated"),
                _record(f"infinitesimal[{index}].principle", verdict.principle_residual, tol, "virtual action principle at x violated"),
            ]
        else:
            verdict = service.hamilton_check(trajectory, x, w, tol)
            checks += [
                _record(f"hamilton[{index}].inverse_constitutive", verdict.constitutive_residual, tol, "F(x) = Λ⁻¹ G(x) violated"),
                _record(f"hamilton[{index}].maxwell", verdict.maxwell_residual, tol, "dG(x) = (4π/c) J(x) violated"),
            ]
    return checks


def handle(args: argparse.Namespace, settings: Settings) -> int:
    spec = load_model(args.path, TrajectorySpec)
    service = ElectrodynamicsService(MinkowskiStructure.from_settings(settings), settings)
    trajectory = service.build_trajectory(spec)
    tol = settings.tol_residual

    region_spec = load_model(args.region, CubeDomainSpec) if args.region else spec.region
    if args.mode == "compact" and region_spec is None:
        raise ConfigurationError("--mode compact needs a box: pass --region or give the trajectory a region")
    if region_spec is not None:
        region = CubeDomain.from_spec(region_spec, settings.quad_order, service.space)
    else:
        region = service.default_region(trajectory)
    rng = np.random.default_rng(settings.seed)
    points = np.asarray(spec.points, dtype=float) if spec.points else service.sample_points(region, RANDOM_SAMPLE_POINTS, rng)
    logger.info(f"residual mode {args.mode} for {trajectory.name} on [{region.lower.tolist()}, {region.upper.tolist()}]")

    if args.mode == "el":
        value = _sup(service.euler_lagrange_residual(trajectory.A, trajectory.J), points)
        checks = [_record("euler_lagrange", value, tol, "d(Λ dA) = (4π/c) J violated")]
    elif args.mode == "maxwell":
        value = _sup(service.maxwell_residual(trajectory.G, trajectory.J), points)
        checks = [_record("maxwell", value, tol, "dG = (4π/c) J violated")]
    elif args.mode == "compact":
        verdict = service.compact_domain_check(trajectory, region, tol=tol)
        checks = [
            _record("compact.interior", verdict.interior_residual, tol, "interior Euler-Lagrange equation d(Λ dA) = (4π/c)J in K violated"),
            _record("compact.boundary", verdict.boundary_residual, tol, "boundary constitutive relation G = Λ dA on ∂K violated"),
        ]
    else:
        w = GradedElement.from_json(spec.w.model_dump()) if spec.w is not None else None
        if w is not None:
            w = GradedElement(service.space, w.kind, w.parity, w.grade, w.coefficients)
        checks = _point_checks(service, trajectory, points, w, args.mode, tol)

    config = {"mode": args.mode, "trajectory": trajectory.name, "seed": settings.seed, "c_light": settings.c_light, "tol_residual": tol}
    report = Report(suite=f"residual.{args.mode}", checks=checks, version=__version__, config=config)
    return finish_report(report, settings)
