from __future__ import annotations

import argparse
import logging

from msvi.cli.common import add_solver_flags, add_source_flags, solver_fields, source_fields
from msvi.core.config import settings
from msvi.models.bench import ALGORITHMS, RunConfig
from msvi.services import bench_service

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_NOT_CONVERGED = 3


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("solve", help="resuelve un problema con un algoritmo")
    add_source_flags(parser)
    add_solver_flags(parser)
    parser.add_argument("--algo", choices=ALGORITHMS, default="pc_admm")
    parser.add_argument("--trials", type=int, default=1)
    parser.add_argument("--out", type=str, default=settings.OUTPUT_DIR, help="directorio de salida")
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace) -> int:
    config = RunConfig(
        **source_fields(args),
        **solver_fields(args),
        algorithms=(args.algo,),
        trials=args.trials,
        out=args.out,
    )
    summary = bench_service.run(config)
    row = summary.row(args.algo)
    print(
        f"{row.algo}: iter={row.avg_iter:g} time_ms={row.avg_time_ms:.2f}"
        + (f" known_err={row.avg_known_err:.3e}" if row.avg_known_err is not None else "")
    )
    return EXIT_OK if summary.all_converged else EXIT_NOT_CONVERGED
