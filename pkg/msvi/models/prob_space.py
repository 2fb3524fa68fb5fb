from __future__ import annotations

from typing import Any, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, field_validator, model_validator

from msvi.core.exceptions import ShapeError

PROBABILITY_FLOOR = 1e-15
SUM_TOLERANCE = 1e-12


def frozen_array(value: Any, ndim: int | None = None) -> np.ndarray:
    """Copia a float64 y deja el arreglo en solo-lectura."""
    arr = np.array(value, dtype=float)
    if ndim is not None and arr.ndim != ndim:
        raise ValueError(f"se esperaba un arreglo de {ndim} dimensiones, llegó {arr.ndim}")
    arr.setflags(write=False)
    return arr


class SampleSpace(BaseModel):
    """Espacio muestral finito: m átomos con probabilidades estrictamente positivas."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    probabilities: np.ndarray

    @field_validator("probabilities", mode="before")
    @classmethod
    def _as_vector(cls, v: Any) -> np.ndarray:
        arr = frozen_array(v, ndim=1)
        if arr.size == 0:
            raise ValueError("el espacio muestral necesita al menos un átomo")
        if not np.all(np.isfinite(arr)):
            raise ValueError("probabilidades no finitas")
        return arr

    @model_validator(mode="after")
    def _check_distribution(self):
        p = self.probabilities
        low = np.flatnonzero(p < PROBABILITY_FLOOR)
        if low.size:
            raise ValueError(
                f"átomo {int(low[0])} con probabilidad {p[low[0]]!r}: se exigen probabilidades > 0"
            )
        total = float(p.sum())
        if abs(total - 1.0) > SUM_TOLERANCE:
            raise ValueError(f"las probabilidades suman {total!r}, no 1")
        return self

    @classmethod
    def uniform(cls, m: int) -> "SampleSpace":
        return cls(probabilities=np.full(m, 1.0 / m))

    @property
    def atom_count(self) -> int:
        return int(self.probabilities.shape[0])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SampleSpace):
            return NotImplemented
        return self is other or np.array_equal(self.probabilities, other.probabilities)

    def __hash__(self) -> int:
        return hash(self.probabilities.tobytes())


class RandomVector(BaseModel):
    """Vector aleatorio de cuadrado integrable: fila i = valor en el átomo i.

    `blocks` guarda la descomposición por etapas (n_0, ..., n_{N-1}).
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    space: SampleSpace
    values: np.ndarray
    blocks: tuple[int, ...]

    @model_validator(mode="before")
    @classmethod
    def _default_blocks(cls, data: Any) -> Any:
        if isinstance(data, dict) and not data.get("blocks"):
            vals = np.asarray(data.get("values"))
            n = int(vals.shape[1]) if vals.ndim == 2 else 1
            data = {**data, "blocks": (n,)}
        return data

    @field_validator("values", mode="before")
    @classmethod
    def _as_matrix(cls, v: Any) -> np.ndarray:
        arr = np.array(v, dtype=float)
        if arr.ndim == 1:
            arr = arr[:, None]
        if arr.ndim != 2:
            raise ValueError("values debe ser una matriz m x n")
        arr.setflags(write=False)
        return arr

    @model_validator(mode="after")
    def _check_shape(self):
        rows, cols = self.values.shape
        if rows != self.space.atom_count:
            raise ValueError(
                f"values tiene {rows} filas pero el espacio tiene {self.space.atom_count} átomos"
            )
        if any(b < 1 for b in self.blocks):
            raise ValueError("las dimensiones de bloque deben ser positivas")
        if sum(self.blocks) != cols:
            raise ValueError(f"los bloques {self.blocks} no suman {cols} columnas")
        return self

    @classmethod
    def zeros(cls, space: SampleSpace, blocks: Sequence[int]) -> "RandomVector":
        return cls(space=space, values=np.zeros((space.atom_count, sum(blocks))), blocks=tuple(blocks))

    @property
    def n(self) -> int:
        return int(self.values.shape[1])

    @property
    def offsets(self) -> tuple[int, ...]:
        return tuple(int(o) for o in np.concatenate(([0], np.cumsum(self.blocks))))

    def block(self, i: int) -> np.ndarray:
        offs = self.offsets
        return self.values[:, offs[i]:offs[i + 1]]

    def with_values(self, values: np.ndarray) -> "RandomVector":
        return RandomVector(space=self.space, values=values, blocks=self.blocks)

    def check_compatible(self, other: "RandomVector") -> None:
        if self.space != other.space:
            raise ShapeError("los vectores aleatorios viven en espacios muestrales distintos")
        if self.values.shape != other.values.shape:
            raise ShapeError(f"formas incompatibles: {self.values.shape} vs {other.values.shape}")

    def __add__(self, other: "RandomVector") -> "RandomVector":
        self.check_compatible(other)
        return self.with_values(self.values + other.values)

    def __sub__(self, other: "RandomVector") -> "RandomVector":
        self.check_compatible(other)
        return self.with_values(self.values - other.values)

    def __neg__(self) -> "RandomVector":
        return self.with_values(-self.values)

    def __mul__(self, scalar: float) -> "RandomVector":
        return self.with_values(float(scalar) * self.values)

    __rmul__ = __mul__

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RandomVector):
            return NotImplemented
        return (
            self.space == other.space
            and self.blocks == other.blocks
            and np.array_equal(self.values, other.values)
        )

    def __hash__(self) -> int:
        return hash((self.blocks, self.values.tobytes()))


class Partition(BaseModel):
    """Partición de {0, ..., m-1}; genera la sigma-álgebra de la etapa."""

    model_config = ConfigDict(frozen=True)

    atom_count: int = Field(..., ge=1)
    cells: tuple[tuple[int, ...], ...]

    _labels: np.ndarray = PrivateAttr()

    @model_validator(mode="after")
    def _check_cover(self):
        _build_labels(self.atom_count, self.cells)
        return self

    def model_post_init(self, __context: Any) -> None:
        self._labels = _build_labels(self.atom_count, self.cells)

    @classmethod
    def trivial(cls, m: int) -> "Partition":
        return cls(atom_count=m, cells=(tuple(range(m)),))

    @classmethod
    def finest(cls, m: int) -> "Partition":
        return cls(atom_count=m, cells=tuple((i,) for i in range(m)))

    @classmethod
    def from_labels(cls, labels: Any) -> "Partition":
        """Agrupa átomos con la misma etiqueta (filas iguales si es 2D); celdas en orden de aparición."""
        arr = np.asarray(labels)
        if arr.ndim == 1:
            arr = arr[:, None]
        m = int(arr.shape[0])
        _, first, inverse = np.unique(arr, axis=0, return_index=True, return_inverse=True)
        inverse = np.asarray(inverse).reshape(-1)
        rank = np.empty_like(first)
        rank[np.argsort(first, kind="stable")] = np.arange(first.size)
        relabeled = rank[inverse]
        order = np.argsort(relabeled, kind="stable")
        counts = np.bincount(relabeled, minlength=first.size)
        cells = tuple(tuple(int(i) for i in chunk) for chunk in np.split(order, np.cumsum(counts)[:-1]))
        return cls(atom_count=m, cells=cells)

    @property
    def labels(self) -> np.ndarray:
        return self._labels

    @property
    def cell_count(self) -> int:
        return len(self.cells)

    def refines(self, other: "Partition") -> bool:
        """True si cada celda de self está contenida en una celda de other."""
        if self.atom_count != other.atom_count:
            return False
        pairs = self.labels.astype(np.int64) * other.cell_count + other.labels
        return np.unique(pairs).size == self.cell_count

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Partition):
            return NotImplemented
        return self.atom_count == other.atom_count and self.cells == other.cells

    def __hash__(self) -> int:
        return hash((self.atom_count, self.cells))


def _build_labels(m: int, cells: Sequence[Sequence[int]]) -> np.ndarray:
    labels = np.full(m, -1, dtype=np.int64)
    for c, cell in enumerate(cells):
        if not cell:
            raise ValueError(f"la celda {c} está vacía")
        idx = np.asarray(cell, dtype=np.int64)
        if idx.min() < 0 or idx.max() >= m:
            raise ValueError(f"la celda {c} tiene índices fuera de 0..{m - 1}")
        if np.unique(idx).size != idx.size or np.any(labels[idx] != -1):
            raise ValueError(f"la celda {c} se superpone con otra celda")
        labels[idx] = c
    missing = np.flatnonzero(labels < 0)
    if missing.size:
        raise ValueError(f"la partición no cubre los átomos {missing[:10].tolist()}")
    labels.setflags(write=False)
    return labels
