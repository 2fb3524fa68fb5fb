from __future__ import annotations

from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, PrivateAttr, model_validator

from msvi.models.prob_space import Partition, SampleSpace


class Filtration(BaseModel):
    """Cadena creciente de particiones F_0 ⊂ ... ⊂ F_{N-1} con dimensiones por etapa."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    space: SampleSpace
    stages: tuple[Partition, ...]
    stage_dims: tuple[int, ...]

    _masses: tuple[np.ndarray, ...] = PrivateAttr()

    @model_validator(mode="after")
    def _check_chain(self):
        if not self.stages:
            raise ValueError("la filtración necesita al menos una etapa")
        if len(self.stages) != len(self.stage_dims):
            raise ValueError(
                f"{len(self.stages)} etapas pero {len(self.stage_dims)} dimensiones de etapa"
            )
        if any(d < 1 for d in self.stage_dims):
            raise ValueError("las dimensiones de etapa deben ser positivas")
        m = self.space.atom_count
        for i, stage in enumerate(self.stages):
            if stage.atom_count != m:
                raise ValueError(f"la etapa {i} está definida sobre {stage.atom_count} átomos, no {m}")
        if self.stages[0].cell_count != 1:
            raise ValueError("la etapa 0 debe ser la partición trivial (F_0 = {∅, Ω})")
        for i in range(len(self.stages) - 1):
            if not self.stages[i + 1].refines(self.stages[i]):
                raise ValueError(f"la etapa {i + 1} no refina a la etapa {i}")
        return self

    def model_post_init(self, __context: Any) -> None:
        p = self.space.probabilities
        self._masses = tuple(
            np.bincount(stage.labels, weights=p, minlength=stage.cell_count) for stage in self.stages
        )

    @property
    def dimension(self) -> int:
        return int(sum(self.stage_dims))

    @property
    def offsets(self) -> tuple[int, ...]:
        return tuple(int(o) for o in np.concatenate(([0], np.cumsum(self.stage_dims))))

    @property
    def masses(self) -> tuple[np.ndarray, ...]:
        return self._masses

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Filtration):
            return NotImplemented
        return (
            self.space == other.space
            and self.stages == other.stages
            and self.stage_dims == other.stage_dims
        )

    def __hash__(self) -> int:
        return hash((self.stages, self.stage_dims))
