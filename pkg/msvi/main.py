from __future__ import annotations

import argparse
import logging
import sys

from pydantic import ValidationError

from msvi.cli import bench, gen, solve
from msvi.core.config import settings
from msvi.core.exceptions import ConfigError, ProblemFileError, ProblemValidationError, TheoryViolation
from msvi.core.logging import setup_logging

logger = logging.getLogger("msvi")

EXIT_CONFIG_ERROR = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="msvi",
        description="PC-ADMM y PHA para desigualdades variacionales estocásticas multietapa.",
    )
    parser.add_argument("--log-level", dest="log_level", default=settings.LOG_LEVEL)
    subparsers = parser.add_subparsers(dest="command", required=True)
    solve.register(subparsers)
    bench.register(subparsers)
    gen.register(subparsers)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.log_level)
    try:
        return args.handler(args)
    except (ConfigError, ProblemFileError, ProblemValidationError) as exc:
        logger.error("configuración inválida | %s", exc)
        return EXIT_CONFIG_ERROR
    except ValidationError as exc:
        logger.error("configuración inválida | %s", exc.errors()[0]["msg"])
        return EXIT_CONFIG_ERROR
    except TheoryViolation as exc:
        logger.error("verificación teórica fallida | %s", exc)
        return solve.EXIT_NOT_CONVERGED


if __name__ == "__main__":
    sys.exit(main())
