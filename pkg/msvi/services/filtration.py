from __future__ import annotations

from typing import Sequence

import numpy as np

from msvi.core.exceptions import ShapeError
from msvi.models.filtration import Filtration
from msvi.models.prob_space import Partition, RandomVector, SampleSpace
from msvi.services.prob_space import cell_average


def two_stage(space: SampleSpace, n0: int, n1: int) -> Filtration:
    """F_0 trivial y F_1 = 2^Ω (el segundo bloque se observa por completo)."""
    m = space.atom_count
    return Filtration(
        space=space,
        stages=(Partition.trivial(m), Partition.finest(m)),
        stage_dims=(n0, n1),
    )


def filtration_from_signals(
    space: SampleSpace,
    signals: Sequence[np.ndarray],
    stage_dims: Sequence[int],
) -> Filtration:
    """Etapa i generada por (xi_1, ..., xi_i): átomos con el mismo prefijo de señales comparten celda.

    `signals` trae N-1 arreglos de m filas (una señal por etapa posterior a la 0).
    """
    m = space.atom_count
    if len(signals) != len(stage_dims) - 1:
        raise ShapeError(
            f"se esperaban {len(stage_dims) - 1} señales para {len(stage_dims)} etapas, llegaron {len(signals)}"
        )
    stages = [Partition.trivial(m)]
    columns: list[np.ndarray] = []
    for i, signal in enumerate(signals):
        arr = np.asarray(signal, dtype=float)
        if arr.ndim == 1:
            arr = arr[:, None]
        if arr.shape[0] != m:
            raise ShapeError(f"la señal {i + 1} tiene {arr.shape[0]} filas y el espacio {m} átomos")
        columns.append(arr)
        stages.append(Partition.from_labels(np.hstack(columns)))
    return Filtration(space=space, stages=tuple(stages), stage_dims=tuple(stage_dims))


def project_n_values(values: np.ndarray, f: Filtration) -> np.ndarray:
    """Pi_N sobre arreglos: cada bloque se reemplaza por su esperanza condicional en su etapa."""
    p = f.space.probabilities
    offs = f.offsets
    out = np.empty_like(values)
    for i, stage in enumerate(f.stages):
        cols = slice(offs[i], offs[i + 1])
        if stage.cell_count == stage.atom_count:
            out[:, cols] = values[:, cols]
        else:
            out[:, cols] = cell_average(values[:, cols], p, stage.labels, f.masses[i])
    return out


def _check_blocks(x: RandomVector, f: Filtration) -> None:
    if x.space != f.space:
        raise ShapeError("el vector aleatorio y la filtración usan espacios distintos")
    if x.blocks != f.stage_dims:
        raise ShapeError(f"bloques {x.blocks} no coinciden con las etapas {f.stage_dims}")


def project_nonanticipativity(x: RandomVector, f: Filtration) -> RandomVector:
    _check_blocks(x, f)
    return x.with_values(project_n_values(x.values, f))


def project_complement(x: RandomVector, f: Filtration) -> RandomVector:
    """Pi_M(x) = x - Pi_N(x); cada bloque queda con esperanza condicional nula."""
    _check_blocks(x, f)
    return x.with_values(x.values - project_n_values(x.values, f))


def is_nonanticipative(x: RandomVector, f: Filtration, tol: float = 1e-12) -> bool:
    _check_blocks(x, f)
    return bool(np.max(np.abs(project_n_values(x.values, f) - x.values), initial=0.0) <= tol)
