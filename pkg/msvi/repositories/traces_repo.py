from __future__ import annotations

import csv
import logging
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

from msvi.models.bench import SummaryRow, TrialRow
from msvi.models.solver import IterationRecord

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

TRACE_HEADER = ("iter", "err", "d_gnorm", "phi", "elapsed_ms")
SUMMARY_HEADER = ("algo", "m", "n", "eps", "avg_iter", "avg_time_ms", "avg_known_err")
TRIALS_HEADER = ("algo", "trial", "seed", "iterations", "err", "elapsed_ms", "converged", "known_err")


def _cell(value: object) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_rows(path: PathLike, header: Sequence[str], rows: Iterable[Sequence[object]]) -> Path:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    with p.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v) for v in row])
    return p


def trace_path(out_dir: PathLike, algo: str, trial: int) -> Path:
    return Path(out_dir) / f"trace_{algo}_{trial}.csv"


def write_trace(path: PathLike, trace: Sequence[IterationRecord]) -> Path:
    """Una fila por iteración; PHA deja d_gnorm y phi vacíos."""
    return _write_rows(
        path,
        TRACE_HEADER,
        ((r.iter, r.err, r.d_gnorm, r.phi, r.elapsed_ms) for r in trace),
    )


def write_summary(path: PathLike, rows: Sequence[SummaryRow]) -> Path:
    return _write_rows(
        path,
        SUMMARY_HEADER,
        ((r.algo, r.m, r.n, r.eps, r.avg_iter, r.avg_time_ms, r.avg_known_err) for r in rows),
    )


def write_trials(path: PathLike, rows: Sequence[TrialRow]) -> Path:
    return _write_rows(
        path,
        TRIALS_HEADER,
        (
            (r.algo, r.trial, r.seed, r.iterations, r.err, r.elapsed_ms, r.converged, r.known_err)
            for r in rows
        ),
    )


def read_rows(path: PathLike) -> list[dict[str, str]]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def write_summary_xlsx(path: PathLike, rows: Sequence[SummaryRow], title: Optional[str] = None) -> Path:
    """Tabla Avg-time / Avg-iter por algoritmo en una hoja de cálculo."""
    try:
        from openpyxl import Workbook
        from openpyxl.styles import Font
    except ImportError as exc:
        raise RuntimeError("openpyxl no está instalado. Instálalo para exportar el resumen a Excel.") from exc

    workbook = Workbook()
    sheet = workbook.active
    sheet.title = "resumen"
    start = 1
    if title:
        sheet.cell(row=1, column=1, value=title).font = Font(bold=True)
        start = 3
    for col, name in enumerate(SUMMARY_HEADER, start=1):
        sheet.cell(row=start, column=col, value=name).font = Font(bold=True)
    for offset, r in enumerate(rows, start=1):
        values = (r.algo, r.m, r.n, r.eps, r.avg_iter, r.avg_time_ms / 1000.0, r.avg_known_err)
        for col, value in enumerate(values, start=1):
            sheet.cell(row=start + offset, column=col, value=value)
    # la columna de tiempo se exporta en segundos
    sheet.cell(row=start, column=6, value="avg_time_s")
    sheet.column_dimensions["A"].width = 12
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    workbook.save(p)
    logger.info("resumen exportado a Excel | path=%s | filas=%s", p, len(rows))
    return p
