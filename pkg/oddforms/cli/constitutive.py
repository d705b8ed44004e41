import argparse

from pydantic import ValidationError

from oddforms.cli.common import add_common_flags, dump_json, first_error, read_json, write_output
from oddforms.core.config import Settings
from oddforms.core.exceptions import EXIT_PASS, DimensionMismatchError, InputValidationError
from oddforms.core.logger import setup_logger
from oddforms.services.electrodynamics import ElectrodynamicsService, MinkowskiStructure
from oddforms.services.exterior_algebra import GradedElement

logger = setup_logger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser("constitutive", help="G = (∧²g⁻¹F) ⌟ √|g| for a 2-covector F")
    parser.add_argument("path", help="GradedElement JSON of F (or of G with --inverse)")
    parser.add_argument("--inverse", action="store_true", help="map G back to F")
    add_common_flags(parser)
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace, settings: Settings) -> int:
    try:
        element = GradedElement.from_json(read_json(args.path))
    except ValidationError as e:
        raise InputValidationError(args.path, *first_error(e))
    except ValueError as e:
        raise InputValidationError(args.path, "coeffs", str(e))
    service = ElectrodynamicsService(MinkowskiStructure.from_settings(settings), settings)
    if element.dim != service.space.dim:
        raise DimensionMismatchError(service.space.dim, element.dim)
    # results use the Minkowski labelling 0..3
    element = GradedElement(service.space, element.kind, element.parity, element.grade, element.coefficients)
    result = service.constitutive_inverse(element) if args.inverse else service.constitutive(element)
    logger.debug(f"{'inverse ' if args.inverse else ''}constitutive map of {element!r}")
    print(dump_json(result.to_json()))
    write_output(result.to_json(), settings.report_path)
    return EXIT_PASS
