from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from msvi.core.exceptions import ShapeError
from msvi.models.convex_sets import (
    BallSet,
    BoxSet,
    ConvexSet,
    HalfspaceSet,
    PointwiseSet,
    WholeSpace,
)
from msvi.models.prob_space import RandomVector


def _project_rows(s: ConvexSet, rows: np.ndarray) -> np.ndarray:
    """Proyecta cada fila de `rows` sobre el mismo conjunto s (forma cerrada)."""
    if isinstance(s, BoxSet):
        return np.clip(rows, np.asarray(s.lower), np.asarray(s.upper))
    if isinstance(s, BallSet):
        center = np.asarray(s.center)
        diff = rows - center
        norms = np.linalg.norm(diff, axis=1)
        scale = np.ones_like(norms)
        outside = norms > s.radius
        scale[outside] = s.radius / norms[outside]
        return center + diff * scale[:, None]
    if isinstance(s, HalfspaceSet):
        normal = np.asarray(s.normal)
        excess = np.maximum(rows @ normal - s.offset, 0.0)
        return rows - np.outer(excess / float(normal @ normal), normal)
    if isinstance(s, WholeSpace):
        return rows.copy()
    raise TypeError(f"conjunto no soportado: {type(s).__name__}")


def project_point(s: ConvexSet, v: np.ndarray) -> np.ndarray:
    """Punto más cercano de s a v."""
    vec = np.asarray(v, dtype=float).reshape(-1)
    if vec.shape[0] != s.dim:
        raise ShapeError(f"el punto tiene dimensión {vec.shape[0]} y el conjunto {s.dim}")
    return _project_rows(s, vec[None, :])[0]


def project_product(product: Sequence[ConvexSet], v: np.ndarray) -> np.ndarray:
    vec = np.asarray(v, dtype=float).reshape(-1)
    if vec.shape[0] != sum(s.dim for s in product):
        raise ShapeError("el punto no coincide con la dimensión del producto")
    out = np.empty_like(vec)
    start = 0
    for s in product:
        stop = start + s.dim
        out[start:stop] = _project_rows(s, vec[None, start:stop])[0]
        start = stop
    return out


def product_projector(product: Sequence[ConvexSet]) -> Callable[[np.ndarray], np.ndarray]:
    """Proyector de un solo átomo, armado una vez para los bucles internos."""
    slices = []
    start = 0
    for s in product:
        slices.append((s, slice(start, start + s.dim)))
        start += s.dim
    if len(slices) == 1 and isinstance(slices[0][0], BoxSet):
        lower = np.asarray(slices[0][0].lower)
        upper = np.asarray(slices[0][0].upper)
        return lambda v: np.clip(v, lower, upper)

    def _project(v: np.ndarray) -> np.ndarray:
        out = np.empty_like(v)
        for s, cols in slices:
            out[cols] = _project_rows(s, v[None, cols])[0]
        return out

    return _project


def project_c_values(cs: PointwiseSet, values: np.ndarray) -> np.ndarray:
    """Pi_C sobre arreglos m x n, agrupando los átomos que comparten producto."""
    out = np.empty_like(values)
    for product, rows in zip(cs.products, cs.groups):
        if rows.size == 0:
            continue
        start = 0
        for s in product:
            cols = slice(start, start + s.dim)
            out[rows, cols] = _project_rows(s, values[rows, cols])
            start = cols.stop
    return out


def _check_shapes(cs: PointwiseSet, x: RandomVector) -> None:
    if x.space != cs.space:
        raise ShapeError("el vector aleatorio y el conjunto usan espacios distintos")
    if x.blocks != cs.block_dims:
        raise ShapeError(f"bloques {x.blocks} no coinciden con el conjunto {cs.block_dims}")


def project_random_vector(cs: PointwiseSet, x: RandomVector) -> RandomVector:
    _check_shapes(cs, x)
    return x.with_values(project_c_values(cs, x.values))


def contains(cs: PointwiseSet, x: RandomVector, tol: float = 1e-12) -> bool:
    _check_shapes(cs, x)
    gap = np.abs(project_c_values(cs, x.values) - x.values)
    return bool(np.max(gap, initial=0.0) <= tol)


def _sample_rows(s: ConvexSet, count: int, rng: np.random.Generator) -> np.ndarray:
    if isinstance(s, BoxSet):
        return rng.uniform(np.asarray(s.lower), np.asarray(s.upper), size=(count, s.dim))
    if isinstance(s, BallSet):
        direction = rng.standard_normal((count, s.dim))
        direction /= np.maximum(np.linalg.norm(direction, axis=1, keepdims=True), 1e-300)
        radius = s.radius * rng.random(count) ** (1.0 / s.dim)
        return np.asarray(s.center) + direction * radius[:, None]
    # semiespacio y espacio completo: gaussiana proyectada
    return _project_rows(s, 3.0 * rng.standard_normal((count, s.dim)))


def sample_feasible(cs: PointwiseSet, rng: np.random.Generator) -> RandomVector:
    """Un punto de C(ω) por átomo."""
    m = cs.space.atom_count
    values = np.empty((m, cs.dimension))
    for product, rows in zip(cs.products, cs.groups):
        start = 0
        for s in product:
            cols = slice(start, start + s.dim)
            values[rows, cols] = _sample_rows(s, rows.size, rng)
            start = cols.stop
    return RandomVector(space=cs.space, values=values, blocks=cs.block_dims)
