from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any, Dict, Union

from pydantic import ValidationError

from msvi.core.exceptions import ConfigError, ProblemFileError, ProblemValidationError
from msvi.models.convex_sets import PointwiseSet
from msvi.models.filtration import Filtration
from msvi.models.operators import AffineOperator, RankOneOperator
from msvi.models.problem_file import (
    AffineOperatorSpec,
    GeneratorSpec,
    ProblemFile,
    RankOneOperatorSpec,
)
from msvi.models.problems import ProblemInstance
from msvi.models.prob_space import Partition, RandomVector, SampleSpace
from msvi.services.problems import generate, params_error_field, validate_params

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
_EXPLICIT_FIELDS = ("probabilities", "stages", "stage_dims", "sets")


def _field_of(exc: ValidationError) -> str:
    err = exc.errors()[0]
    return ".".join(str(part) for part in err["loc"]) or "<raíz>"


def _first_message(exc: ValidationError) -> str:
    return exc.errors()[0]["msg"]


def _to_file(instance: ProblemInstance, as_generator: bool) -> ProblemFile:
    if as_generator:
        if instance.family == "custom":
            raise ConfigError("una instancia 'custom' no tiene generador; guárdala con datos explícitos")
        return ProblemFile(
            family=instance.family,
            seed=instance.seed,
            params=dict(instance.params),
            operator=GeneratorSpec(family=instance.family, params=dict(instance.params), seed=instance.seed),
        )
    op = instance.operator
    if isinstance(op, AffineOperator):
        operator: Any = AffineOperatorSpec(matrices=op.matrices.tolist(), offsets=op.offsets.tolist())
    elif isinstance(op, RankOneOperator):
        operator = RankOneOperatorSpec(factors=op.factors.tolist(), offsets=op.offsets.tolist())
    else:
        raise ConfigError("un operador callback no se puede serializar a archivo")
    known = instance.known_solution
    return ProblemFile(
        family=instance.family,
        seed=instance.seed,
        params=dict(instance.params),
        probabilities=instance.space.probabilities.tolist(),
        stages=[[list(cell) for cell in stage.cells] for stage in instance.filtration.stages],
        stage_dims=list(instance.filtration.stage_dims),
        sets=[list(product) for product in instance.sets.per_atom],
        operator=operator,
        known_solution=known.values.tolist() if known is not None else None,
    )


def _explicit_instance(doc: ProblemFile) -> ProblemInstance:
    for name in _EXPLICIT_FIELDS:
        if getattr(doc, name) is None:
            raise ProblemFileError("campo obligatorio ausente con operador explícito", field=name)

    # 1) espacio, filtración y conjuntos; cada paso valida sus invariantes
    step = "probabilities"
    try:
        space = SampleSpace(probabilities=doc.probabilities)
        m = space.atom_count
        step = "stages"
        filtration = Filtration(
            space=space,
            stages=tuple(Partition(atom_count=m, cells=tuple(tuple(c) for c in cells)) for cells in doc.stages),
            stage_dims=tuple(doc.stage_dims),
        )
        step = "sets"
        if len(doc.sets) != m:
            raise ProblemValidationError(f"sets tiene {len(doc.sets)} átomos y el espacio {m}")
        sets = PointwiseSet.from_per_atom(space, doc.sets)

        # 2) operador
        step = "operator"
        spec = doc.operator
        if isinstance(spec, AffineOperatorSpec):
            operator: Any = AffineOperator(space=space, matrices=spec.matrices, offsets=spec.offsets)
        else:
            operator = RankOneOperator(space=space, factors=spec.factors, offsets=spec.offsets)

        step = "known_solution"
        known = None
        if doc.known_solution is not None:
            known = RandomVector(space=space, values=doc.known_solution, blocks=filtration.stage_dims)
        step = "instance"
        return ProblemInstance(
            space=space,
            filtration=filtration,
            sets=sets,
            operator=operator,
            known_solution=known,
            seed=doc.seed,
            family=doc.family,
            params=doc.params,
        )
    except ValidationError as exc:
        raise ProblemValidationError(f"{step}: {_first_message(exc)}") from exc
    except ValueError as exc:
        if isinstance(exc, ProblemValidationError):
            raise
        raise ProblemValidationError(f"{step}: {exc}") from exc


def _generated_instance(doc: ProblemFile) -> ProblemInstance:
    spec = doc.operator
    try:
        validate_params(spec.family, spec.params)
    except ValidationError as exc:
        raise ProblemFileError(_first_message(exc), field=f"operator.params.{params_error_field(exc)}") from exc
    instance = generate(spec.family, spec.params, spec.seed)
    if any(getattr(doc, name) is not None for name in _EXPLICIT_FIELDS):
        explicit = _to_file(instance, as_generator=False)
        for name in _EXPLICIT_FIELDS:
            given = getattr(doc, name)
            if given is not None and given != getattr(explicit, name):
                raise ProblemValidationError(f"{name} no coincide con la instancia regenerada por {spec.family!r}")
    return instance


def from_document(data: Dict[str, Any]) -> ProblemInstance:
    try:
        doc = ProblemFile.model_validate(data)
    except ValidationError as exc:
        raise ProblemFileError(_first_message(exc), field=_field_of(exc)) from exc
    if isinstance(doc.operator, GeneratorSpec):
        return _generated_instance(doc)
    return _explicit_instance(doc)


def to_document(instance: ProblemInstance, as_generator: bool = False) -> Dict[str, Any]:
    return _to_file(instance, as_generator).model_dump(mode="json", exclude_none=True)


def load_problem(path: PathLike) -> ProblemInstance:
    """Lee un archivo de problema JSON y reconstruye la instancia validada."""
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ProblemFileError(f"no se pudo leer {p}: {exc.strerror}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemFileError(f"JSON inválido en {p} (línea {exc.lineno}, columna {exc.colno})") from exc
    if not isinstance(data, dict):
        raise ProblemFileError("el documento debe ser un objeto JSON")
    instance = from_document(data)
    logger.info("problema cargado | path=%s | m=%s | n=%s", p, instance.atom_count, instance.dimension)
    return instance


def save_problem(instance: ProblemInstance, path: PathLike, as_generator: bool = False) -> Path:
    p = Path(path)
    if p.parent and not p.parent.exists():
        p.parent.mkdir(parents=True, exist_ok=True)
    doc = to_document(instance, as_generator=as_generator)
    p.write_text(json.dumps(doc, indent=1, allow_nan=False) + "\n", encoding="utf-8")
    logger.info("problema guardado | path=%s | family=%s | generador=%s", p, instance.family, as_generator)
    return p
