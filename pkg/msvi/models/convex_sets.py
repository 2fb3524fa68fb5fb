from __future__ import annotations

from typing import Annotated, Any, Literal, Sequence, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, model_validator

from msvi.models.prob_space import SampleSpace


class BoxSet(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["box"] = "box"
    lower: tuple[float, ...]
    upper: tuple[float, ...]

    @model_validator(mode="after")
    def _check_bounds(self):
        if not self.lower or len(self.lower) != len(self.upper):
            raise ValueError("box: lower y upper deben tener la misma dimensión (>= 1)")
        if any(lo > up for lo, up in zip(self.lower, self.upper)):
            raise ValueError("box: se exige lower <= upper por componente")
        return self

    @classmethod
    def cube(cls, dim: int, low: float = -1.0, high: float = 1.0) -> "BoxSet":
        return cls(lower=(low,) * dim, upper=(high,) * dim)

    @property
    def dim(self) -> int:
        return len(self.lower)


class BallSet(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["ball"] = "ball"
    center: tuple[float, ...] = Field(..., min_length=1)
    radius: float = Field(..., gt=0)

    @property
    def dim(self) -> int:
        return len(self.center)


class HalfspaceSet(BaseModel):
    """{v : <normal, v> <= offset}."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["halfspace"] = "halfspace"
    normal: tuple[float, ...] = Field(..., min_length=1)
    offset: float

    @model_validator(mode="after")
    def _check_normal(self):
        if not any(c != 0.0 for c in self.normal):
            raise ValueError("halfspace: la normal no puede ser nula")
        return self

    @property
    def dim(self) -> int:
        return len(self.normal)


class WholeSpace(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["whole_space"] = "whole_space"
    dim: int = Field(..., ge=1)


ConvexSet = Annotated[
    Union[BoxSet, BallSet, HalfspaceSet, WholeSpace],
    Field(discriminator="kind"),
]

# C(ω) = C_0(ω) x ... x C_{N-1}(ω)
SetProduct = tuple[ConvexSet, ...]


class PointwiseSet(BaseModel):
    """Conjunto de restricciones átomo a átomo.

    Se guardan los productos distintos (`products`) y, por átomo, el índice del
    producto que le toca (`assignment`); `per_atom` reconstruye la lista completa.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    space: SampleSpace
    products: tuple[SetProduct, ...]
    assignment: np.ndarray

    _groups: tuple[np.ndarray, ...] = PrivateAttr()

    @model_validator(mode="before")
    @classmethod
    def _coerce_assignment(cls, data: Any) -> Any:
        if isinstance(data, dict) and "assignment" in data:
            arr = np.array(data["assignment"], dtype=np.int64).reshape(-1)
            arr.setflags(write=False)
            data = {**data, "assignment": arr}
        return data

    @model_validator(mode="after")
    def _check_products(self):
        if not self.products:
            raise ValueError("se necesita al menos un producto de conjuntos")
        if self.assignment.shape[0] != self.space.atom_count:
            raise ValueError(
                f"assignment tiene {self.assignment.shape[0]} entradas y el espacio {self.space.atom_count} átomos"
            )
        if self.assignment.min() < 0 or self.assignment.max() >= len(self.products):
            raise ValueError("assignment apunta a un producto inexistente")
        dims = [tuple(s.dim for s in product) for product in self.products]
        if any(not d for d in dims):
            raise ValueError("cada producto necesita al menos un conjunto")
        if len(set(dims)) != 1:
            raise ValueError(f"los átomos no comparten dimensiones de bloque: {sorted(set(dims))}")
        return self

    def model_post_init(self, __context: Any) -> None:
        self._groups = tuple(
            np.flatnonzero(self.assignment == g) for g in range(len(self.products))
        )

    @classmethod
    def uniform(cls, space: SampleSpace, product: Sequence[ConvexSet]) -> "PointwiseSet":
        return cls(
            space=space,
            products=(tuple(product),),
            assignment=np.zeros(space.atom_count, dtype=np.int64),
        )

    @classmethod
    def from_per_atom(cls, space: SampleSpace, per_atom: Sequence[Sequence[ConvexSet]]) -> "PointwiseSet":
        index: dict[tuple, int] = {}
        assignment = []
        for product in per_atom:
            key = tuple(product)
            if key not in index:
                index[key] = len(index)
            assignment.append(index[key])
        return cls(space=space, products=tuple(index), assignment=np.asarray(assignment, dtype=np.int64))

    @property
    def block_dims(self) -> tuple[int, ...]:
        return tuple(s.dim for s in self.products[0])

    @property
    def dimension(self) -> int:
        return int(sum(self.block_dims))

    @property
    def groups(self) -> tuple[np.ndarray, ...]:
        return self._groups

    @property
    def per_atom(self) -> tuple[SetProduct, ...]:
        return tuple(self.products[g] for g in self.assignment)

    def product_at(self, atom: int) -> SetProduct:
        return self.products[int(self.assignment[atom])]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PointwiseSet):
            return NotImplemented
        return self.space == other.space and self.per_atom == other.per_atom

    def __hash__(self) -> int:
        return hash((self.products, self.assignment.tobytes()))
