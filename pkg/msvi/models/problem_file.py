from __future__ import annotations

from typing import Annotated, Any, Dict, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field

from msvi.models.convex_sets import ConvexSet

PROBLEM_FORMAT = "msvi-problem/1"


class AffineOperatorSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["affine"] = "affine"
    matrices: List[List[List[float]]]
    offsets: List[List[float]]


class RankOneOperatorSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Literal["rank_one"] = "rank_one"
    factors: List[List[float]]
    offsets: List[List[float]]


class GeneratorSpec(BaseModel):
    """Instancia descrita por su generador en lugar de datos explícitos."""

    model_config = ConfigDict(extra="forbid")

    kind: Literal["generator"] = "generator"
    family: str = Field(..., description="Nombre registrado en GENERATORS.")
    params: Dict[str, Any] = Field(default_factory=dict)
    seed: int = 0


OperatorSpec = Annotated[
    Union[AffineOperatorSpec, RankOneOperatorSpec, GeneratorSpec],
    Field(discriminator="kind"),
]


class ProblemFile(BaseModel):
    """Documento JSON de una instancia.

    Con operador explícito los campos probabilities, stages, stage_dims y sets
    son obligatorios; con `operator.kind == "generator"` son opcionales y, si
    vienen, deben coincidir con la instancia regenerada.
    """

    model_config = ConfigDict(extra="forbid")

    format: Literal["msvi-problem/1"] = PROBLEM_FORMAT
    family: str = "custom"
    seed: int = 0
    params: Dict[str, Any] = Field(default_factory=dict)
    probabilities: Optional[List[float]] = None
    # particiones por etapa, cada una como lista de celdas de índices 0-based
    stages: Optional[List[List[List[int]]]] = None
    stage_dims: Optional[List[int]] = None
    # por átomo, el producto C_0(ω) x ... x C_{N-1}(ω)
    sets: Optional[List[List[ConvexSet]]] = None
    operator: OperatorSpec
    known_solution: Optional[List[List[float]]] = None
