from __future__ import annotations

from typing import Any, Optional

from pydantic import BaseModel, ConfigDict, Field, StrictBool, StrictInt, model_validator

from msvi.models.convex_sets import PointwiseSet
from msvi.models.filtration import Filtration
from msvi.models.operators import AffineOperator, CallbackOperator, RankOneOperator
from msvi.models.prob_space import RandomVector, SampleSpace

KNOWN_SOLUTION_TOLERANCE = 1e-9
DEFAULT_ETA_NOISE = 0.1


class RandomAffineParams(BaseModel):
    """Parámetros de `random_affine`: m átomos, n0 + n1 coordenadas."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    m: StrictInt = Field(..., ge=1, description="Cantidad de átomos.")
    n0: StrictInt = Field(..., ge=1, description="Dimensión de la primera etapa.")
    n1: StrictInt = Field(..., ge=1, description="Dimensión de la segunda etapa.")


class RandomWalkSocpParams(BaseModel):
    """Parámetros de `random_walk_socp`: N etapas de control, ell pasos por etapa."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    N: StrictInt = Field(..., ge=1, description="Cantidad de etapas de control.")
    ell: StrictInt = Field(..., ge=1, description="Pasos de la caminata por etapa.")
    seed_free: StrictBool = Field(default=True, description="Sin ruido en eta (óptimo conocido u* = 1).")
    noise: float = Field(default=DEFAULT_ETA_NOISE, ge=0, allow_inf_nan=False, description="Desvío del ruido de eta.")


class ProblemInstance(BaseModel):
    """Una MSVI completa: hallar x* en C ∩ N con <F(x*), x - x*> >= 0 para x en C ∩ N."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    space: SampleSpace
    filtration: Filtration
    sets: PointwiseSet
    operator: AffineOperator | RankOneOperator | CallbackOperator = Field(..., discriminator="kind")
    known_solution: Optional[RandomVector] = None
    seed: int = 0
    family: str = Field(default="custom", description="Generador de origen (random_affine, random_walk_socp, custom).")
    params: dict[str, Any] = Field(default_factory=dict, description="Parámetros del generador, para reproducir la instancia.")

    @model_validator(mode="after")
    def _check_components(self):
        for name, component in (
            ("filtration", self.filtration),
            ("sets", self.sets),
            ("operator", self.operator),
        ):
            if component.space != self.space:
                raise ValueError(f"{name} está definido sobre otro espacio muestral")
        dims = self.filtration.stage_dims
        if self.sets.block_dims != dims:
            raise ValueError(f"bloques de C {self.sets.block_dims} distintos de las etapas {dims}")
        if self.operator.dim != self.filtration.dimension:
            raise ValueError(f"F actúa sobre R^{self.operator.dim} y las etapas suman {self.filtration.dimension}")
        x = self.known_solution
        if x is not None:
            # import diferido: services importa models
            from msvi.services.convex_sets import project_c_values
            from msvi.services.filtration import project_n_values

            if x.space != self.space or x.blocks != dims:
                raise ValueError("known_solution no coincide con el espacio o los bloques")
            off_c = float(abs(project_c_values(self.sets, x.values) - x.values).max())
            off_n = float(abs(project_n_values(x.values, self.filtration) - x.values).max())
            if max(off_c, off_n) > KNOWN_SOLUTION_TOLERANCE:
                raise ValueError(
                    f"known_solution no está en C ∩ N (dist_C={off_c:.2e}, dist_N={off_n:.2e})"
                )
        return self

    @property
    def atom_count(self) -> int:
        return self.space.atom_count

    @property
    def dimension(self) -> int:
        return self.filtration.dimension

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ProblemInstance):
            return NotImplemented
        return (
            self.space == other.space
            and self.filtration == other.filtration
            and self.sets == other.sets
            and self.operator == other.operator
            and self.known_solution == other.known_solution
            and self.seed == other.seed
        )

    __hash__ = None  # type: ignore[assignment]
