from __future__ import annotations

import numpy as np

POWER_TOL = 1e-10
POWER_MAX_STEPS = 10_000


def sym(matrix: np.ndarray) -> np.ndarray:
    return 0.5 * (matrix + matrix.T)


def _power_run(matrix: np.ndarray, v: np.ndarray, tol: float, max_steps: int) -> float:
    estimate = float(v @ matrix @ v)
    for _ in range(max_steps):
        w = matrix @ v
        norm = float(np.linalg.norm(w))
        if norm == 0.0:
            return 0.0
        v = w / norm
        new_estimate = float(v @ matrix @ v)
        if abs(new_estimate - estimate) <= tol * max(abs(new_estimate), 1e-300):
            return max(new_estimate, 0.0)
        estimate = new_estimate
    return max(estimate, 0.0)


def power_iteration(matrix: np.ndarray, tol: float = POWER_TOL, max_steps: int = POWER_MAX_STEPS) -> float:
    """Mayor autovalor de una matriz simétrica semidefinida positiva.

    Corre desde (sqrt(1), ..., sqrt(n)) normalizado y desde cada e_j, y se queda
    con el máximo: ningún autovector es ortogonal a toda la base canónica.
    Corta cuando el cociente de Rayleigh cambia menos que `tol` en términos relativos.
    """
    n = matrix.shape[0]
    start = np.sqrt(np.arange(1.0, n + 1.0))
    starts = [start / np.linalg.norm(start), *np.eye(n)]
    return max(_power_run(matrix, v, tol, max_steps) for v in starts)


def operator_norm_bound(matrix: np.ndarray) -> float:
    """Constante de Lipschitz de v -> M v.

    Para M simétrica es el mayor autovalor de M (PSD); si no lo es se usa
    sqrt(lambda_max(M^T M)), que es la norma espectral.
    """
    if np.allclose(matrix, matrix.T, rtol=0.0, atol=1e-12):
        return power_iteration(sym(matrix))
    return float(np.sqrt(power_iteration(matrix.T @ matrix)))
