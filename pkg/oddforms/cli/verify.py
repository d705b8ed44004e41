import argparse

from oddforms.cli.common import add_common_flags, finish_report
from oddforms.core.config import Settings
from oddforms.services.verification import DEFAULT_DIMS, SUITES, VerificationService, parse_dims


def register(subparsers) -> None:
    parser = subparsers.add_parser("verify", help="run an invariant suite")
    parser.add_argument("suite", help=f"one of {', '.join(SUITES)} or all")
    parser.add_argument(
        "--dims",
        default=f"{DEFAULT_DIMS[0]}..{DEFAULT_DIMS[-1]}",
        help="dimensions for the algebra suites, e.g. 2..5 or 2,4",
    )
    add_common_flags(parser)
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace, settings: Settings) -> int:
    report = VerificationService(settings).run(args.suite, parse_dims(args.dims))
    return finish_report(report, settings)
