# msvi/services/bench_service.py
from __future__ import annotations

import logging
from pathlib import Path
from typing import Optional

import numpy as np

from msvi.models.bench import Algorithm, BenchSummary, RunConfig, SummaryRow, TrialRow
from msvi.models.problems import ProblemInstance
from msvi.models.prob_space import RandomVector
from msvi.models.solver import PcAdmmParams, PhaParams, SolverReport
from msvi.repositories import problems_repo, traces_repo
from msvi.services import solver_pc_admm, solver_pha
from msvi.services.problems import generate

logger = logging.getLogger(__name__)


def known_error(instance: ProblemInstance, x: RandomVector) -> Optional[float]:
    """||x - known_solution||_{L^2}; None si la instancia no trae solución conocida."""
    known = instance.known_solution
    if known is None:
        return None
    gap = x.values - known.values
    return float(np.sqrt(np.dot(instance.space.probabilities, np.einsum("ij,ij->i", gap, gap))))


def pc_admm_params(config: RunConfig) -> PcAdmmParams:
    return PcAdmmParams(
        alpha=config.alpha,
        beta_scale=config.beta_scale,
        eps=config.eps,
        max_iter=config.max_iter,
        assert_theory=config.assert_theory,
    )


def pha_params(config: RunConfig) -> PhaParams:
    return PhaParams(
        beta_scale=config.beta_scale,
        eps=config.eps,
        inner_tol=config.inner_tol,
        max_iter=config.max_iter,
        max_inner_iter=config.max_inner_iter,
        assert_theory=config.assert_theory,
    )


def solve_with(algo: Algorithm, instance: ProblemInstance, config: RunConfig) -> SolverReport:
    if algo == "pc_admm":
        return solver_pc_admm.solve(instance, pc_admm_params(config))
    return solver_pha.solve(instance, pha_params(config))


def _instance_for(config: RunConfig, trial: int, cached: Optional[ProblemInstance]) -> ProblemInstance:
    if config.generator is not None:
        spec = config.generator
        return generate(spec.family, spec.params, spec.seed + trial)
    return cached if cached is not None else problems_repo.load_problem(config.problem_path)


def _mean(values: list[float]) -> float:
    return sum(values) / len(values)


def run(config: RunConfig) -> BenchSummary:
    """Ejecuta las repeticiones (semillas seed, seed+1, ...) y escribe trazas y resúmenes en `config.out`."""
    out = Path(config.out)
    trial_rows: list[TrialRow] = []
    shape: Optional[tuple[int, int]] = None
    instance: Optional[ProblemInstance] = None
    logger.info(
        "Bench inicio | algoritmos=%s | trials=%s | eps=%.1e | out=%s",
        ",".join(config.algorithms), config.trials, config.eps, out,
    )

    for trial in range(config.trials):
        instance = _instance_for(config, trial, instance)
        seed = config.base_seed + trial if config.generator is not None else instance.seed
        if shape is None:
            shape = (instance.atom_count, instance.dimension)
        for algo in config.algorithms:
            report = solve_with(algo, instance, config)
            if config.write_traces:
                traces_repo.write_trace(traces_repo.trace_path(out, algo, trial), report.trace)
            row = TrialRow(
                algo=algo,
                trial=trial,
                seed=seed,
                iterations=report.iterations,
                err=report.final_err,
                elapsed_ms=report.elapsed_ms,
                converged=report.converged,
                known_err=known_error(instance, report.solution),
            )
            trial_rows.append(row)
            if not report.converged:
                logger.warning(
                    "repetición sin converger | algo=%s | trial=%s | seed=%s | err=%.3e | %s",
                    algo, trial, seed, report.final_err, report.message,
                )

    # 1) promedios por algoritmo
    m, n = shape
    summary_rows = []
    for algo in config.algorithms:
        mine = [r for r in trial_rows if r.algo == algo]
        known = [r.known_err for r in mine if r.known_err is not None]
        summary_rows.append(
            SummaryRow(
                algo=algo,
                m=m,
                n=n,
                eps=config.eps,
                avg_iter=_mean([float(r.iterations) for r in mine]),
                avg_time_ms=_mean([r.elapsed_ms for r in mine]),
                avg_known_err=_mean(known) if len(known) == len(mine) else None,
            )
        )
    summary = BenchSummary(rows=tuple(summary_rows), trials=tuple(trial_rows))

    # 2) artefactos
    traces_repo.write_summary(out / "summary.csv", summary.rows)
    traces_repo.write_trials(out / "trials.csv", summary.trials)
    if config.xlsx:
        traces_repo.write_summary_xlsx(out / "summary.xlsx", summary.rows, title=f"eps={config.eps:g}")

    for row in summary.rows:
        logger.info(
            "Bench resumen | algo=%s | avg_iter=%.1f | avg_time_ms=%.2f | avg_known_err=%s",
            row.algo, row.avg_iter, row.avg_time_ms, row.avg_known_err,
        )
    return summary
