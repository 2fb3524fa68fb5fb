from __future__ import annotations

import numpy as np

from msvi.core.exceptions import ShapeError, StructureError
from msvi.models.prob_space import Partition, RandomVector


def weighted_inner(probabilities: np.ndarray, a: np.ndarray, b: np.ndarray) -> float:
    """sum_i p_i <a_i, b_i> sobre arreglos m x n (sin validar)."""
    return float(np.dot(probabilities, np.einsum("ij,ij->i", a, b)))


def cell_masses(probabilities: np.ndarray, partition: Partition) -> np.ndarray:
    return np.bincount(partition.labels, weights=probabilities, minlength=partition.cell_count)


def cell_average(
    values: np.ndarray,
    probabilities: np.ndarray,
    labels: np.ndarray,
    masses: np.ndarray,
) -> np.ndarray:
    """Promedio ponderado por celda, devuelto átomo a átomo (E[a | G] en arreglos)."""
    k = masses.shape[0]
    out = np.empty((k, values.shape[1]))
    weighted = values * probabilities[:, None]
    for j in range(values.shape[1]):
        out[:, j] = np.bincount(labels, weights=weighted[:, j], minlength=k)
    out /= masses[:, None]
    return out[labels]


def l2_inner(a: RandomVector, b: RandomVector) -> float:
    a.check_compatible(b)
    return weighted_inner(a.space.probabilities, a.values, b.values)


def l2_norm(a: RandomVector) -> float:
    return float(np.sqrt(max(l2_inner(a, a), 0.0)))


def conditional_expectation(a: RandomVector, g: Partition) -> RandomVector:
    """E[a | sigma(g)]: constante en cada celda e igual al promedio ponderado por p."""
    if g.atom_count != a.space.atom_count:
        raise StructureError(
            f"la partición cubre {g.atom_count} átomos y el espacio tiene {a.space.atom_count}"
        )
    p = a.space.probabilities
    return a.with_values(cell_average(a.values, p, g.labels, cell_masses(p, g)))


def check_same_shape(a: RandomVector, b: RandomVector) -> None:
    if a.blocks != b.blocks:
        raise ShapeError(f"bloques incompatibles: {a.blocks} vs {b.blocks}")
    a.check_compatible(b)
