from __future__ import annotations

import math
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from msvi.core.config import settings
from msvi.models.problem_file import GeneratorSpec

Algorithm = Literal["pc_admm", "pha"]
ALGORITHMS: tuple[Algorithm, ...] = ("pc_admm", "pha")


class RunConfig(BaseModel):
    """Configuración de una corrida de benchmark (una o ambas variantes, varias repeticiones)."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    generator: Optional[GeneratorSpec] = Field(default=None, description="Familia + parámetros + semilla base.")
    problem_path: Optional[str] = Field(default=None, description="Archivo JSON de problema.")
    algorithms: tuple[Algorithm, ...] = Field(default=ALGORITHMS, min_length=1)
    trials: int = Field(default=settings.DEFAULT_TRIALS, ge=1)
    eps: float = Field(default=settings.DEFAULT_EPS, gt=0)
    max_iter: int = Field(default=settings.DEFAULT_MAX_ITER, ge=1)
    alpha: float = Field(default=settings.DEFAULT_ALPHA, gt=0, lt=1)
    beta_scale: float = Field(default=settings.DEFAULT_BETA_SCALE, gt=0)
    inner_tol: Optional[float] = Field(default=None, gt=0)
    max_inner_iter: int = Field(default=settings.PHA_MAX_INNER_ITER, ge=1)
    assert_theory: bool = False
    out: str = settings.OUTPUT_DIR
    write_traces: bool = True
    xlsx: bool = False

    @model_validator(mode="after")
    def _check_source(self):
        if (self.generator is None) == (self.problem_path is None):
            raise ValueError("se necesita exactamente una fuente: generator o problem_path")
        if len(set(self.algorithms)) != len(self.algorithms):
            raise ValueError("algoritmos repetidos")
        return self

    @property
    def base_seed(self) -> int:
        return self.generator.seed if self.generator is not None else 0


class TrialRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    algo: Algorithm
    trial: int
    seed: int
    iterations: int
    err: float
    elapsed_ms: float
    converged: bool
    known_err: Optional[float] = None


class SummaryRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    algo: Algorithm
    m: int
    n: int
    eps: float
    avg_iter: float
    avg_time_ms: float
    avg_known_err: Optional[float] = None


class BenchSummary(BaseModel):
    model_config = ConfigDict(frozen=True)

    rows: tuple[SummaryRow, ...]
    trials: tuple[TrialRow, ...]

    @model_validator(mode="after")
    def _check_means(self):
        for row in self.rows:
            mine = [t for t in self.trials if t.algo == row.algo]
            if not mine:
                raise ValueError(f"resumen de {row.algo} sin filas por repetición")
            avg_iter = sum(t.iterations for t in mine) / len(mine)
            avg_time = sum(t.elapsed_ms for t in mine) / len(mine)
            if not (math.isclose(avg_iter, row.avg_iter) and math.isclose(avg_time, row.avg_time_ms)):
                raise ValueError(f"los promedios de {row.algo} no coinciden con las repeticiones")
        return self

    @property
    def all_converged(self) -> bool:
        return all(t.converged for t in self.trials)

    def row(self, algo: Algorithm) -> SummaryRow:
        return next(r for r in self.rows if r.algo == algo)
