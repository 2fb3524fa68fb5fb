from __future__ import annotations

import logging
import math
import time
from typing import Callable, NamedTuple, Optional, Sequence

import numpy as np

from msvi.core.config import settings
from msvi.core.exceptions import ConfigError, InnerSolveError, ShapeError, TheoryViolation
from msvi.models.convex_sets import ConvexSet
from msvi.models.operators import AffineAtom, AtomMap
from msvi.models.problems import ProblemInstance
from msvi.models.prob_space import RandomVector
from msvi.models.solver import IterationRecord, PhaParams, SolverReport, Triplet
from msvi.services.convex_sets import project_c_values, product_projector
from msvi.services.filtration import project_n_values
from msvi.services.operators import atom_lipschitz, atom_map, evaluate_values, lipschitz_estimate, residual_values
from msvi.utils.linalg import operator_norm_bound

logger = logging.getLogger(__name__)

MULTIPLIER_TOL = 1e-10


class PointwiseSolution(NamedTuple):
    point: np.ndarray
    iterations: int
    residual: float
    history: tuple[float, ...] = ()


def _atom_lipschitz(F_atom: AtomMap) -> float:
    if isinstance(F_atom, AffineAtom):
        return operator_norm_bound(np.asarray(F_atom.matrix))
    return float(F_atom.lipschitz)


def solve_pointwise_vi(
    F_atom: AtomMap,
    c_atom: Sequence[ConvexSet],
    u: np.ndarray,
    v: np.ndarray,
    beta: float,
    inner_tol: float,
    *,
    max_inner_iter: int = settings.PHA_MAX_INNER_ITER,
    start: Optional[np.ndarray] = None,
    lipschitz: Optional[float] = None,
    projector: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    atom: Optional[int] = None,
    record: bool = False,
) -> PointwiseSolution:
    """Resuelve -F(w) - v - beta (w - u) ∈ N_C(w) en un átomo.

    Iteración de punto fijo proyectada con paso tau = 1/(beta + L): el mapa
    w -> F(w) + v + beta (w - u) es fuertemente monótono con módulo beta, así
    que la iteración contrae. Devuelve w con |w - Pi_C(w - tau g(w))| <= inner_tol.
    """
    if beta <= 0:
        raise ConfigError("beta debe ser positivo")
    u = np.asarray(u, dtype=float).reshape(-1)
    v = np.asarray(v, dtype=float).reshape(-1)
    dim = sum(s.dim for s in c_atom)
    if u.shape[0] != dim or v.shape[0] != dim:
        raise ShapeError(f"u y v deben vivir en R^{dim}")
    project = projector if projector is not None else product_projector(c_atom)
    L = _atom_lipschitz(F_atom) if lipschitz is None else lipschitz
    tau = 1.0 / (beta + L)
    stop = min(tau, 1.0) * inner_tol

    w = u.copy() if start is None else np.array(start, dtype=float).reshape(-1)
    history: list[float] = []
    residual = math.inf
    for it in range(1, max_inner_iter + 1):
        g = F_atom(w) + v + beta * (w - u)
        w_next = project(w - tau * g)
        residual = float(np.linalg.norm(w_next - w))
        if record:
            history.append(residual)
        w = w_next
        if residual <= stop:
            return PointwiseSolution(point=w, iterations=it, residual=residual, history=tuple(history))
    raise InnerSolveError(atom, residual, max_inner_iter)


def default_start(problem: ProblemInstance) -> tuple[RandomVector, RandomVector]:
    """u0 = Pi_N(Pi_C(0)), v0 = 0."""
    zero = RandomVector.zeros(problem.space, problem.filtration.stage_dims)
    u0 = project_n_values(project_c_values(problem.sets, zero.values), problem.filtration)
    return zero.with_values(u0), zero


def _n_component(values: np.ndarray, problem: ProblemInstance) -> float:
    return float(np.max(np.abs(project_n_values(values, problem.filtration)), initial=0.0))


def _check_start(problem: ProblemInstance, u: RandomVector, v: RandomVector) -> None:
    for name, vec in (("u0", u), ("v0", v)):
        if vec.space != problem.space or vec.blocks != problem.filtration.stage_dims:
            raise ShapeError(f"{name} no coincide con el espacio o las etapas del problema")
    off_n = float(np.max(np.abs(project_n_values(u.values, problem.filtration) - u.values), initial=0.0))
    if off_n > 1e-9:
        raise ConfigError(f"u0 no es no anticipativo (dist_N={off_n:.2e})")
    off_c = float(np.max(np.abs(project_c_values(problem.sets, u.values) - u.values), initial=0.0))
    if off_c > 1e-9:
        raise ConfigError(f"u0 infactible: fuera de C (dist_C={off_c:.2e})")
    v_n = _n_component(v.values, problem)
    if v_n > 1e-9:
        raise ConfigError(f"v0 no está en M (|Pi_N v0|={v_n:.2e})")


def _resolve_beta(problem: ProblemInstance, params: PhaParams) -> float:
    if params.beta is not None:
        return params.beta
    lipschitz = lipschitz_estimate(problem.operator)
    return params.beta_scale * (lipschitz if lipschitz > 0 else 1.0)


def solve(
    problem: ProblemInstance,
    params: PhaParams,
    start: Optional[tuple[RandomVector, RandomVector]] = None,
) -> SolverReport:
    """Algoritmo de cobertura progresiva (PHA).

    Por iteración: VI puntual implícita en cada átomo, u <- Pi_N(u_hat),
    v <- v + beta Pi_M(u_hat). Err se evalúa con x = u_hat, y = u, lam = -v.
    """
    beta = _resolve_beta(problem, params)
    u_rv, v_rv = start if start is not None else default_start(problem)
    _check_start(problem, u_rv, v_rv)
    F, cs, f = problem.operator, problem.sets, problem.filtration
    p = problem.space.probabilities
    m = problem.atom_count

    maps = [atom_map(F, i) for i in range(m)]
    lips = atom_lipschitz(F)
    projectors = [product_projector(product) for product in cs.products]
    inner_tol = params.effective_inner_tol

    u = np.array(u_rv.values)
    v = np.array(v_rv.values)
    u_hat = u.copy()
    trace: list[IterationRecord] = []
    err = math.inf
    best_err = math.inf
    stalled = 0
    inner_total = 0
    message = ""
    logger.info(
        "PHA inicio | m=%s | n=%s | beta=%.4g | eps=%.1e | inner_tol=%.1e",
        m, problem.dimension, beta, params.eps, inner_tol,
    )
    t0 = time.perf_counter()
    k = 0
    while k < params.max_iter:
        try:
            for i in range(m):
                sol = solve_pointwise_vi(
                    maps[i],
                    cs.product_at(i),
                    u[i],
                    v[i],
                    beta,
                    inner_tol,
                    max_inner_iter=params.max_inner_iter,
                    start=u_hat[i],
                    lipschitz=float(lips[i]),
                    projector=projectors[int(cs.assignment[i])],
                    atom=i,
                )
                u_hat[i] = sol.point
                inner_total += sol.iterations
        except InnerSolveError as exc:
            logger.warning("PHA subproblema sin converger | iter=%s | %s", k, exc)
            message = str(exc)
            break
        u = project_n_values(u_hat, f)
        v = v + beta * (u_hat - u)
        if params.assert_theory:
            scale = max(1.0, float(np.max(np.abs(v), initial=0.0)))
            v_n = _n_component(v, problem)
            if v_n > MULTIPLIER_TOL * scale:
                raise TheoryViolation("v en M", k, v_n, MULTIPLIER_TOL * scale)
        err = residual_values(cs, p, u_hat, u, -v, evaluate_values(F, u_hat))
        k += 1
        trace.append(IterationRecord(iter=k, err=err, elapsed_ms=(time.perf_counter() - t0) * 1000.0))
        if k % settings.TRACE_LOG_EVERY == 0:
            logger.debug("PHA | iter=%s | err=%.3e | inner=%s", k, err, inner_total)
        if err < params.eps:
            break
        if params.tighten_inner:
            if err < best_err:
                best_err, stalled = err, 0
            else:
                stalled += 1
                if stalled >= params.stall_window:
                    inner_tol *= 0.5
                    stalled = 0
                    logger.debug("PHA ajusta inner_tol | iter=%s | inner_tol=%.1e", k, inner_tol)
    elapsed_ms = (time.perf_counter() - t0) * 1000.0

    template = u_rv
    if k == 0:
        # sin ninguna iteración completa el certificado es el punto inicial
        x_cert = u
        err = residual_values(cs, p, u, u, -v, evaluate_values(F, u))
    else:
        x_cert = u_hat
    converged = err < params.eps
    if converged:
        logger.info("PHA terminado | iter=%s | err=%.3e | inner=%s | ms=%.1f", k, err, inner_total, elapsed_ms)
        message = "convergió"
    else:
        logger.warning("PHA sin converger | iter=%s | err=%.3e | eps=%.1e", k, err, params.eps)
        message = message or f"max_iter={params.max_iter} agotado"
    return SolverReport(
        algorithm="pha",
        converged=converged,
        iterations=k,
        final_err=err,
        trace=tuple(trace),
        certificate=Triplet(
            x=template.with_values(x_cert),
            y=template.with_values(u),
            lam=template.with_values(-v),
        ),
        elapsed_ms=elapsed_ms,
        beta=beta,
        message=message,
    )
