from __future__ import annotations

from typing import Any, Callable, Literal, NamedTuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from msvi.models.prob_space import SampleSpace, frozen_array

PSD_TOLERANCE = 1e-10


class AffineOperator(BaseModel):
    """F(x)(ω_i) = M_i x(ω_i) + b_i, con sym(M_i) semidefinida positiva."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    kind: Literal["affine"] = "affine"
    space: SampleSpace
    matrices: np.ndarray
    offsets: np.ndarray

    @field_validator("matrices", mode="before")
    @classmethod
    def _as_stack(cls, v: Any) -> np.ndarray:
        return frozen_array(v, ndim=3)

    @field_validator("offsets", mode="before")
    @classmethod
    def _as_rows(cls, v: Any) -> np.ndarray:
        return frozen_array(v, ndim=2)

    @model_validator(mode="after")
    def _check_monotone(self):
        m, n, n2 = self.matrices.shape
        if n != n2:
            raise ValueError("las matrices M_i deben ser cuadradas")
        if m != self.space.atom_count or self.offsets.shape != (m, n):
            raise ValueError(
                f"se esperaban {self.space.atom_count} matrices {n}x{n} y offsets {self.space.atom_count}x{n}"
            )
        sym = 0.5 * (self.matrices + np.transpose(self.matrices, (0, 2, 1)))
        smallest = np.linalg.eigvalsh(sym)[:, 0]
        bad = np.flatnonzero(smallest < -PSD_TOLERANCE)
        if bad.size:
            i = int(bad[0])
            raise ValueError(
                f"M_{i} no es monótona: menor autovalor de sym(M_{i}) = {smallest[i]:.3e}"
            )
        return self

    @property
    def dim(self) -> int:
        return int(self.matrices.shape[1])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, AffineOperator):
            return NotImplemented
        return (
            self.space == other.space
            and np.array_equal(self.matrices, other.matrices)
            and np.array_equal(self.offsets, other.offsets)
        )

    def __hash__(self) -> int:
        return hash((self.matrices.tobytes(), self.offsets.tobytes()))


class RankOneOperator(BaseModel):
    """F(x)(ω_i) = z_i (z_i^T x(ω_i)) + b_i, guardado en forma factorizada."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    kind: Literal["rank_one"] = "rank_one"
    space: SampleSpace
    factors: np.ndarray
    offsets: np.ndarray

    @field_validator("factors", "offsets", mode="before")
    @classmethod
    def _as_rows(cls, v: Any) -> np.ndarray:
        return frozen_array(v, ndim=2)

    @model_validator(mode="after")
    def _check_shapes(self):
        if self.factors.shape[0] != self.space.atom_count or self.factors.shape != self.offsets.shape:
            raise ValueError("factors y offsets deben ser matrices m x n de la misma forma")
        return self

    @property
    def dim(self) -> int:
        return int(self.factors.shape[1])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RankOneOperator):
            return NotImplemented
        return (
            self.space == other.space
            and np.array_equal(self.factors, other.factors)
            and np.array_equal(self.offsets, other.offsets)
        )

    def __hash__(self) -> int:
        return hash((self.factors.tobytes(), self.offsets.tobytes()))


class CallbackOperator(BaseModel):
    """F puntual dado por el usuario: func(i, v) -> F(v)(ω_i). La monotonía no se verifica."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    kind: Literal["callback"] = "callback"
    space: SampleSpace
    dim: int = Field(..., ge=1)
    func: Callable[[int, np.ndarray], np.ndarray]
    lipschitz: float = Field(..., ge=0)


OperatorHandle = Union[AffineOperator, RankOneOperator, CallbackOperator]


class AffineAtom(NamedTuple):
    matrix: np.ndarray
    offset: np.ndarray

    def __call__(self, v: np.ndarray) -> np.ndarray:
        return self.matrix @ v + self.offset


class CallbackAtom(NamedTuple):
    func: Callable[[np.ndarray], np.ndarray]
    lipschitz: float

    def __call__(self, v: np.ndarray) -> np.ndarray:
        return np.asarray(self.func(v), dtype=float)


AtomMap = Union[AffineAtom, CallbackAtom]
