from __future__ import annotations

import argparse

from msvi.cli.common import add_source_flags, generator_params
from msvi.core.exceptions import ConfigError
from msvi.repositories import problems_repo
from msvi.services.problems import generate


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("gen", help="escribe un archivo de problema")
    add_source_flags(parser, allow_file=False)
    parser.add_argument("--out", type=str, required=True, help="ruta del JSON a escribir")
    parser.add_argument(
        "--as-generator",
        dest="as_generator",
        action="store_true",
        help="guarda solo familia, parámetros y semilla",
    )
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace) -> int:
    if args.family is None:
        raise ConfigError("gen necesita --family")
    instance = generate(args.family, generator_params(args), args.seed)
    path = problems_repo.save_problem(instance, args.out, as_generator=args.as_generator)
    print(path)
    return 0
