from __future__ import annotations

import numpy as np

from msvi.core.exceptions import ShapeError
from msvi.models.convex_sets import PointwiseSet
from msvi.models.filtration import Filtration
from msvi.models.operators import (
    AffineAtom,
    AffineOperator,
    AtomMap,
    CallbackAtom,
    CallbackOperator,
    OperatorHandle,
    RankOneOperator,
)
from msvi.models.prob_space import RandomVector
from msvi.services.convex_sets import project_c_values
from msvi.services.prob_space import check_same_shape
from msvi.utils.linalg import operator_norm_bound


def evaluate_values(F: OperatorHandle, values: np.ndarray) -> np.ndarray:
    if isinstance(F, AffineOperator):
        return np.einsum("mij,mj->mi", F.matrices, values) + F.offsets
    if isinstance(F, RankOneOperator):
        return F.factors * np.einsum("mi,mi->m", F.factors, values)[:, None] + F.offsets
    if isinstance(F, CallbackOperator):
        return np.stack([np.asarray(F.func(i, row), dtype=float) for i, row in enumerate(values)])
    raise TypeError(f"operador no soportado: {type(F).__name__}")


def _check_operator(F: OperatorHandle, x: RandomVector) -> None:
    if x.space != F.space:
        raise ShapeError("el operador y el vector aleatorio usan espacios distintos")
    if x.n != F.dim:
        raise ShapeError(f"el operador actúa sobre R^{F.dim} y el vector vive en R^{x.n}")


def evaluate(F: OperatorHandle, x: RandomVector) -> RandomVector:
    """F aplicado átomo a átomo; conserva espacio y bloques."""
    _check_operator(F, x)
    return x.with_values(evaluate_values(F, x.values))


def atom_lipschitz(F: OperatorHandle) -> np.ndarray:
    """Constante de Lipschitz de cada F(·)(ω_i)."""
    if isinstance(F, AffineOperator):
        return np.array([operator_norm_bound(M) for M in F.matrices])
    if isinstance(F, RankOneOperator):
        return np.einsum("mi,mi->m", F.factors, F.factors)
    return np.full(F.space.atom_count, float(F.lipschitz))


def lipschitz_estimate(F: OperatorHandle) -> float:
    """L_F = max_i sigma_i (mayor autovalor de sym(M_i) por iteración de potencias)."""
    return float(np.max(atom_lipschitz(F), initial=0.0))


def atom_map(F: OperatorHandle, atom: int) -> AtomMap:
    if isinstance(F, AffineOperator):
        return AffineAtom(matrix=F.matrices[atom], offset=F.offsets[atom])
    if isinstance(F, RankOneOperator):
        z = F.factors[atom]
        return AffineAtom(matrix=np.outer(z, z), offset=F.offsets[atom])
    return CallbackAtom(func=lambda v, i=atom: F.func(i, v), lipschitz=float(F.lipschitz))


def residual_values(
    cs: PointwiseSet,
    probabilities: np.ndarray,
    x: np.ndarray,
    y: np.ndarray,
    lam: np.ndarray,
    fx: np.ndarray,
) -> float:
    """Err = max_i |x_i - Pi_{C_i}(x_i - F(x)_i + lam_i)| + sum_i p_i |x_i - y_i|^2."""
    natural = x - project_c_values(cs, x - fx + lam)
    first = float(np.max(np.linalg.norm(natural, axis=1), initial=0.0))
    gap = x - y
    return first + float(np.dot(probabilities, np.einsum("ij,ij->i", gap, gap)))


def msvi_residual(
    F: OperatorHandle,
    cs: PointwiseSet,
    f: Filtration,
    x: RandomVector,
    y: RandomVector,
    lam: RandomVector,
) -> float:
    check_same_shape(x, y)
    check_same_shape(x, lam)
    _check_operator(F, x)
    if x.blocks != f.stage_dims or x.blocks != cs.block_dims:
        raise ShapeError(f"bloques {x.blocks} no coinciden con etapas {f.stage_dims} / conjunto {cs.block_dims}")
    fx = evaluate_values(F, x.values)
    return residual_values(cs, x.space.probabilities, x.values, y.values, lam.values, fx)


def extensive_form_gap(F: OperatorHandle, x: RandomVector, v: RandomVector, z: RandomVector) -> np.ndarray:
    """<F(x)(ω) + v(ω), z(ω) - x(ω)> por átomo (>= 0 en una solución de la forma extensiva)."""
    check_same_shape(x, v)
    check_same_shape(x, z)
    _check_operator(F, x)
    direction = evaluate_values(F, x.values) + v.values
    return np.einsum("ij,ij->i", direction, z.values - x.values)


def integral_gap(F: OperatorHandle, x: RandomVector, v: RandomVector, z: RandomVector) -> float:
    """E<F(x) + v, z - x>."""
    return float(np.dot(x.space.probabilities, extensive_form_gap(F, x, v, z)))
