from __future__ import annotations

import argparse

from msvi.cli.common import add_solver_flags, add_source_flags, solver_fields, source_fields
from msvi.cli.solve import EXIT_NOT_CONVERGED, EXIT_OK
from msvi.core.config import settings
from msvi.models.bench import ALGORITHMS, RunConfig
from msvi.services import bench_service


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("bench", help="barrido de una familia con ambos algoritmos")
    add_source_flags(parser)
    add_solver_flags(parser)
    parser.add_argument(
        "--algo",
        dest="algorithms",
        action="append",
        choices=ALGORITHMS,
        default=None,
        help="repetible; por defecto pc_admm y pha",
    )
    parser.add_argument("--trials", type=int, default=settings.DEFAULT_TRIALS)
    parser.add_argument("--out", type=str, default=settings.OUTPUT_DIR, help="directorio de salida")
    parser.add_argument("--xlsx", action="store_true", help="exporta además summary.xlsx")
    parser.add_argument("--no-traces", dest="write_traces", action="store_false")
    parser.set_defaults(handler=handle)


def handle(args: argparse.Namespace) -> int:
    config = RunConfig(
        **source_fields(args),
        **solver_fields(args),
        algorithms=tuple(args.algorithms or ALGORITHMS),
        trials=args.trials,
        out=args.out,
        xlsx=args.xlsx,
        write_traces=args.write_traces,
    )
    summary = bench_service.run(config)
    for row in summary.rows:
        known = f"{row.avg_known_err:.3e}" if row.avg_known_err is not None else "-"
        print(
            f"{row.algo:8s} m={row.m} n={row.n} eps={row.eps:g} "
            f"avg_iter={row.avg_iter:.1f} avg_time_ms={row.avg_time_ms:.2f} avg_known_err={known}"
        )
    return EXIT_OK if summary.all_converged else EXIT_NOT_CONVERGED
