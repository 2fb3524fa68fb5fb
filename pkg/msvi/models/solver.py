from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from msvi.core.config import settings
from msvi.models.prob_space import RandomVector

PHI_SLACK = 1e-10
CONTRACTION_SLACK = 1e-8
FEASIBILITY_TOL = 1e-12


class Triplet(BaseModel):
    """theta = (x, y, lam) en K = C x N x L^2."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    x: RandomVector
    y: RandomVector
    lam: RandomVector

    @model_validator(mode="after")
    def _check_shared_shape(self):
        for name, other in (("y", self.y), ("lam", self.lam)):
            if other.space != self.x.space or other.blocks != self.x.blocks:
                raise ValueError(f"{name} no comparte espacio o bloques con x")
        return self

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Triplet):
            return NotImplemented
        return self.x == other.x and self.y == other.y and self.lam == other.lam

    __hash__ = None  # type: ignore[assignment]


class GMetric(BaseModel):
    """G = diag(beta*r, beta, 1/beta). `lipschitz` es la L_F usada para validar r."""

    model_config = ConfigDict(frozen=True)

    beta: float = Field(..., gt=0)
    r: float = Field(..., gt=0)
    lipschitz: float = Field(default=0.0, ge=0)

    @model_validator(mode="after")
    def _check_r(self):
        bound = self.lipschitz / self.beta + 1.0
        if not self.r > bound:
            raise ValueError(f"se exige r > L_F/beta + 1 = {bound:.6g} (r={self.r:.6g})")
        return self


class PcAdmmParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    alpha: float = Field(default=settings.DEFAULT_ALPHA, gt=0, lt=1)
    beta: Optional[float] = Field(default=None, gt=0, description="Si falta: beta_scale * L_F.")
    r: Optional[float] = Field(default=None, gt=0, description="Si falta: 1.1 + L_F / beta.")
    beta_scale: float = Field(default=settings.DEFAULT_BETA_SCALE, gt=0)
    eps: float = Field(default=settings.DEFAULT_EPS, gt=0)
    max_iter: int = Field(default=settings.DEFAULT_MAX_ITER, ge=1)
    assert_theory: bool = False


class PhaParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    beta: Optional[float] = Field(default=None, gt=0, description="Si falta: beta_scale * L_F.")
    beta_scale: float = Field(default=settings.DEFAULT_BETA_SCALE, gt=0)
    eps: float = Field(default=settings.DEFAULT_EPS, gt=0)
    inner_tol: Optional[float] = Field(default=None, gt=0, description="Si falta: eps / 10.")
    max_iter: int = Field(default=settings.DEFAULT_MAX_ITER, ge=1)
    max_inner_iter: int = Field(default=settings.PHA_MAX_INNER_ITER, ge=1)
    tighten_inner: bool = False
    stall_window: int = Field(default=5, ge=1)
    assert_theory: bool = False

    @model_validator(mode="after")
    def _check_inner(self):
        if self.inner_tol is not None and not self.inner_tol < self.eps:
            raise ValueError(f"inner_tol ({self.inner_tol:g}) debe ser menor que eps ({self.eps:g})")
        return self

    @property
    def effective_inner_tol(self) -> float:
        return self.inner_tol if self.inner_tol is not None else self.eps / 10.0


class IterationRecord(BaseModel):
    model_config = ConfigDict(frozen=True)

    iter: int = Field(..., ge=1)
    err: float
    d_gnorm: Optional[float] = None
    phi: Optional[float] = None
    elapsed_ms: float


class SolverReport(BaseModel):
    """Resultado de una corrida; la no convergencia es un estado, no una excepción."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    algorithm: Literal["pc_admm", "pha"]
    converged: bool
    iterations: int = Field(..., ge=0)
    final_err: float
    trace: tuple[IterationRecord, ...] = ()
    certificate: Triplet
    elapsed_ms: float = 0.0
    beta: float
    message: str = ""

    @model_validator(mode="after")
    def _check_trace(self):
        if len(self.trace) != self.iterations:
            raise ValueError(f"la traza tiene {len(self.trace)} filas y se reportan {self.iterations} iteraciones")
        return self

    @property
    def solution(self) -> RandomVector:
        return self.certificate.x
