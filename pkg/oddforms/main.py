import argparse
import sys
from typing import List, Optional

from pydantic import ValidationError

from oddforms import __version__
from oddforms.cli import constitutive, residual, verify
from oddforms.cli.common import first_error, settings_from_args
from oddforms.core.config import get_settings
from oddforms.core.exceptions import EXIT_USAGE, OddFormsError
from oddforms.core.logger import set_debug, setup_logger

logger = setup_logger(__name__)


def build_parser() -> argparse.ArgumentParser:
    settings = get_settings()
    parser = argparse.ArgumentParser(
        prog="oddforms",
        description=f"{settings.app_name}: even/odd exterior calculus and variational electrodynamics checks",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True)

    # Commands
    verify.register(subparsers)
    constitutive.register(subparsers)
    residual.register(subparsers)
    return parser


def run(argv: Optional[List[str]] = None) -> int:
    """Parse argv, dispatch to the command handler and map errors to exit codes."""
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        # argparse exits 2 on usage errors and 0 on --help/--version
        return e.code if isinstance(e.code, int) else EXIT_USAGE

    try:
        settings = settings_from_args(args)
        set_debug(settings.debug)
        return args.handler(args, settings)
    except OddFormsError as e:
        logger.error(f"{args.command} failed: {e.detail}")
        print(f"error: {e.detail}", file=sys.stderr)
        return e.exit_code
    except ValidationError as e:
        location, message = first_error(e)
        logger.error(f"{args.command} failed: {location}: {message}")
        print(f"error: {location}: {message}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
