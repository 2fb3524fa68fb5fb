from __future__ import annotations

import logging
import time
from typing import NamedTuple, Optional

import numpy as np
from pydantic import ValidationError

from msvi.core.config import settings
from msvi.core.exceptions import ConfigError, ShapeError, TheoryViolation
from msvi.models.convex_sets import PointwiseSet
from msvi.models.filtration import Filtration
from msvi.models.operators import OperatorHandle
from msvi.models.problems import ProblemInstance
from msvi.models.prob_space import RandomVector
from msvi.models.solver import (
    CONTRACTION_SLACK,
    FEASIBILITY_TOL,
    PHI_SLACK,
    GMetric,
    IterationRecord,
    PcAdmmParams,
    SolverReport,
    Triplet,
)
from msvi.services.convex_sets import project_c_values
from msvi.services.filtration import project_n_values
from msvi.services.operators import evaluate_values, lipschitz_estimate, residual_values
from msvi.services.prob_space import check_same_shape, weighted_inner

logger = logging.getLogger(__name__)

# cota de la suma de ||d_k||^2_G frente a ||theta^0 - theta*||^2_G / (alpha (1 - alpha))
DIRECTION_SUM_SLACK = 1e-6
REFERENCE_DTOL = 1e-13
REFERENCE_MAX_ITER = 200_000


class _Arrays(NamedTuple):
    x: np.ndarray
    y: np.ndarray
    lam: np.ndarray


class _Kernel:
    """Un paso de predicción-corrección sobre arreglos m x n (sin validar formas)."""

    def __init__(self, F: OperatorHandle, cs: PointwiseSet, f: Filtration, beta: float, r: float):
        self.F = F
        self.cs = cs
        self.f = f
        self.p = f.space.probabilities
        self.beta = beta
        self.r = r

    def operator(self, x: np.ndarray) -> np.ndarray:
        return evaluate_values(self.F, x)

    def inner(self, a: np.ndarray, b: np.ndarray) -> float:
        return weighted_inner(self.p, a, b)

    def gnorm2(self, t: _Arrays) -> float:
        b, r = self.beta, self.r
        return b * r * self.inner(t.x, t.x) + b * self.inner(t.y, t.y) + self.inner(t.lam, t.lam) / b

    def g_inner(self, a: _Arrays, c: _Arrays) -> float:
        b, r = self.beta, self.r
        return b * r * self.inner(a.x, c.x) + b * self.inner(a.y, c.y) + self.inner(a.lam, c.lam) / b

    def predict(self, t: _Arrays, fx: np.ndarray) -> _Arrays:
        b, r = self.beta, self.r
        xt = project_c_values(self.cs, t.x - (fx - t.lam + b * (t.x - t.y)) / (b * r))
        yt = project_n_values(t.y - (t.lam - b * (xt - t.y)) / b, self.f)
        lt = t.lam - b * (xt - yt)
        return _Arrays(xt, yt, lt)

    def direction(self, t: _Arrays, tt: _Arrays, fx: np.ndarray, fxt: np.ndarray) -> _Arrays:
        b, r = self.beta, self.r
        zeta = fx - fxt + b * (t.x - tt.x)
        return _Arrays(t.x - tt.x - zeta / (b * r), t.y - tt.y, t.lam - tt.lam)

    def phi(self, t: _Arrays, tt: _Arrays, d: _Arrays) -> float:
        diff = _Arrays(t.x - tt.x, t.y - tt.y, t.lam - tt.lam)
        return self.inner(diff.lam, tt.y - t.y) + self.g_inner(diff, d)

    def err(self, t: _Arrays, fx: np.ndarray) -> float:
        return residual_values(self.cs, self.p, t.x, t.y, t.lam, fx)


def _arrays(theta: Triplet) -> _Arrays:
    return _Arrays(theta.x.values, theta.y.values, theta.lam.values)


def _triplet(template: RandomVector, t: _Arrays) -> Triplet:
    return Triplet(x=template.with_values(t.x), y=template.with_values(t.y), lam=template.with_values(t.lam))


def _check_problem_shapes(theta: Triplet, F: OperatorHandle, cs: PointwiseSet, f: Filtration) -> None:
    x = theta.x
    if x.space != f.space or x.space != cs.space or x.space != F.space:
        raise ShapeError("el triplete y el problema usan espacios muestrales distintos")
    if x.blocks != f.stage_dims or x.blocks != cs.block_dims or x.n != F.dim:
        raise ShapeError(f"bloques {x.blocks} incompatibles con el problema ({f.stage_dims})")


def g_norm(theta: Triplet, g: GMetric) -> float:
    """sqrt(beta r ||x||^2 + beta ||y||^2 + ||lam||^2 / beta)."""
    p = theta.x.space.probabilities
    t = _arrays(theta)
    total = (
        g.beta * g.r * weighted_inner(p, t.x, t.x)
        + g.beta * weighted_inner(p, t.y, t.y)
        + weighted_inner(p, t.lam, t.lam) / g.beta
    )
    return float(np.sqrt(max(total, 0.0)))


def predict(theta: Triplet, F: OperatorHandle, cs: PointwiseSet, f: Filtration, g: GMetric) -> Triplet:
    """Predicción: tres proyecciones explícitas (Pi_C, Pi_N y la actualización del multiplicador)."""
    _check_problem_shapes(theta, F, cs, f)
    kernel = _Kernel(F, cs, f, g.beta, g.r)
    t = _arrays(theta)
    return _triplet(theta.x, kernel.predict(t, kernel.operator(t.x)))


def correction_direction(theta: Triplet, theta_tilde: Triplet, F: OperatorHandle, g: GMetric) -> Triplet:
    """d = theta - theta_tilde - G^{-1} zeta, con zeta = (F(x) - F(x~) + beta (x - x~), 0, 0)."""
    check_same_shape(theta.x, theta_tilde.x)
    if theta.x.space != F.space or theta.x.n != F.dim:
        raise ShapeError("el operador no coincide con el triplete")
    t, tt = _arrays(theta), _arrays(theta_tilde)
    b, r = g.beta, g.r
    zeta = evaluate_values(F, t.x) - evaluate_values(F, tt.x) + b * (t.x - tt.x)
    d = _Arrays(t.x - tt.x - zeta / (b * r), t.y - tt.y, t.lam - tt.lam)
    return _triplet(theta.x, d)


def phi(theta: Triplet, theta_tilde: Triplet, d: Triplet, g: GMetric) -> float:
    """<lam - lam~, y~ - y> + <theta - theta~, G d>."""
    check_same_shape(theta.x, theta_tilde.x)
    check_same_shape(theta.x, d.x)
    p = theta.x.space.probabilities
    t, tt, dd = _arrays(theta), _arrays(theta_tilde), _arrays(d)
    b, r = g.beta, g.r
    return (
        weighted_inner(p, t.lam - tt.lam, tt.y - t.y)
        + b * r * weighted_inner(p, t.x - tt.x, dd.x)
        + b * weighted_inner(p, t.y - tt.y, dd.y)
        + weighted_inner(p, t.lam - tt.lam, dd.lam) / b
    )


def default_start(problem: ProblemInstance) -> Triplet:
    """x0 = Pi_C(0), y0 = Pi_N(x0), lam0 = 0."""
    zero = RandomVector.zeros(problem.space, problem.filtration.stage_dims)
    x0 = project_c_values(problem.sets, zero.values)
    y0 = project_n_values(x0, problem.filtration)
    return Triplet(x=zero.with_values(x0), y=zero.with_values(y0), lam=zero)


class Certification(NamedTuple):
    xy_gap: float
    multiplier_n_norm: float
    xy_ok: bool
    multiplier_ok: bool

    @property
    def ok(self) -> bool:
        return self.xy_ok and self.multiplier_ok


def certify(theta: Triplet, f: Filtration, eps: float) -> Certification:
    """Caracterización de la solución: x = y y lam en M (||Pi_N lam|| <= 10 eps)."""
    p = f.space.probabilities
    gap = theta.x.values - theta.y.values
    xy_gap = float(np.sqrt(max(weighted_inner(p, gap, gap), 0.0)))
    lam_n = project_n_values(theta.lam.values, f)
    lam_n_norm = float(np.sqrt(max(weighted_inner(p, lam_n, lam_n), 0.0)))
    return Certification(
        xy_gap=xy_gap,
        multiplier_n_norm=lam_n_norm,
        xy_ok=bool(xy_gap <= np.sqrt(eps)),
        multiplier_ok=bool(lam_n_norm <= 10.0 * eps),
    )


def resolve_metric(problem: ProblemInstance, params: PcAdmmParams) -> GMetric:
    """beta = beta_scale * L_F (beta_scale si L_F = 0) y r = 1.1 + L_F / beta, salvo que vengan dados."""
    lipschitz = lipschitz_estimate(problem.operator)
    beta = params.beta if params.beta is not None else params.beta_scale * (lipschitz if lipschitz > 0 else 1.0)
    r = params.r if params.r is not None else 1.1 + lipschitz / beta
    try:
        return GMetric(beta=beta, r=r, lipschitz=lipschitz)
    except ValidationError as exc:
        raise ConfigError(f"parámetros PC-ADMM inválidos: {exc.errors()[0]['msg']}") from exc


def _check_start(problem: ProblemInstance, start: Triplet) -> None:
    _check_problem_shapes(start, problem.operator, problem.sets, problem.filtration)
    t = _arrays(start)
    off_c = float(np.max(np.abs(project_c_values(problem.sets, t.x) - t.x), initial=0.0))
    off_n = float(np.max(np.abs(project_n_values(t.y, problem.filtration) - t.y), initial=0.0))
    if off_c > 1e-9 or off_n > 1e-9:
        raise ConfigError(f"punto inicial infactible (dist_C={off_c:.2e}, dist_N={off_n:.2e})")


def _check_feasible(kernel: _Kernel, tt: _Arrays, k: int) -> None:
    off_c = float(np.max(np.abs(project_c_values(kernel.cs, tt.x) - tt.x), initial=0.0))
    if off_c > FEASIBILITY_TOL:
        raise TheoryViolation("x~ en C", k, off_c, FEASIBILITY_TOL)
    scale = max(1.0, float(np.max(np.abs(tt.y), initial=0.0)))
    off_n = float(np.max(np.abs(project_n_values(tt.y, kernel.f) - tt.y), initial=0.0))
    if off_n > FEASIBILITY_TOL * scale:
        raise TheoryViolation("y~ en N", k, off_n, FEASIBILITY_TOL * scale)


def solve(
    problem: ProblemInstance,
    params: PcAdmmParams,
    start: Optional[Triplet] = None,
    reference: Optional[Triplet] = None,
) -> SolverReport:
    """ADMM de predicción-corrección hasta Err < eps o max_iter.

    Con `assert_theory` se verifica en cada iteración la desigualdad
    phi >= ||d||^2_G / 2 y la factibilidad de x~ e y~; si además llega
    `reference` (una solución de alta precisión) se verifica la contracción
    ||theta^{k+1} - theta*||^2_G <= ||theta^k - theta*||^2_G - alpha(1-alpha)||d||^2_G.
    """
    g = resolve_metric(problem, params)
    theta = start if start is not None else default_start(problem)
    _check_start(problem, theta)
    kernel = _Kernel(problem.operator, problem.sets, problem.filtration, g.beta, g.r)
    alpha, eps = params.alpha, params.eps
    check = params.assert_theory
    ref = _arrays(reference) if reference is not None else None
    if ref is not None:
        check_same_shape(theta.x, reference.x)

    t = _arrays(theta)
    fx = kernel.operator(t.x)
    err = kernel.err(t, fx)
    trace: list[IterationRecord] = []
    dist2 = kernel.gnorm2(_Arrays(*(a - b for a, b in zip(t, ref)))) if ref is not None else 0.0
    dsum_bound = dist2 / (alpha * (1.0 - alpha)) + DIRECTION_SUM_SLACK
    dsum = 0.0
    logger.info(
        "PC-ADMM inicio | m=%s | n=%s | beta=%.4g | r=%.4g | alpha=%.3g | eps=%.1e | err0=%.3e",
        problem.atom_count, problem.dimension, g.beta, g.r, alpha, eps, err,
    )
    t0 = time.perf_counter()
    k = 0
    while err >= eps and k < params.max_iter:
        tt = kernel.predict(t, fx)
        fxt = kernel.operator(tt.x)
        d = kernel.direction(t, tt, fx, fxt)
        d2 = kernel.gnorm2(d)
        phi_k = kernel.phi(t, tt, d)
        if check:
            _check_feasible(kernel, tt, k)
            if phi_k < 0.5 * d2 - PHI_SLACK:
                raise TheoryViolation("phi >= ||d||^2_G / 2", k, phi_k, 0.5 * d2)
        t = _Arrays(t.x - alpha * d.x, t.y - alpha * d.y, t.lam - alpha * d.lam)
        if check and ref is not None:
            new_dist2 = kernel.gnorm2(_Arrays(*(a - b for a, b in zip(t, ref))))
            bound = dist2 - alpha * (1.0 - alpha) * d2 + CONTRACTION_SLACK
            if new_dist2 > bound:
                raise TheoryViolation("contracción en norma G", k, new_dist2, bound)
            dist2 = new_dist2
            dsum += d2
            if dsum > dsum_bound:
                raise TheoryViolation("suma de ||d||^2_G acotada", k, dsum, dsum_bound)
        fx = kernel.operator(t.x)
        err = kernel.err(t, fx)
        k += 1
        trace.append(
            IterationRecord(
                iter=k,
                err=err,
                d_gnorm=float(np.sqrt(max(d2, 0.0))),
                phi=phi_k,
                elapsed_ms=(time.perf_counter() - t0) * 1000.0,
            )
        )
        if k % settings.TRACE_LOG_EVERY == 0:
            logger.debug("PC-ADMM | iter=%s | err=%.3e | d_gnorm=%.3e", k, err, np.sqrt(max(d2, 0.0)))
    elapsed_ms = (time.perf_counter() - t0) * 1000.0

    converged = err < eps
    if converged:
        logger.info("PC-ADMM terminado | iter=%s | err=%.3e | ms=%.1f", k, err, elapsed_ms)
        message = "convergió"
    else:
        logger.warning("PC-ADMM sin converger | iter=%s | err=%.3e | eps=%.1e", k, err, eps)
        message = f"max_iter={params.max_iter} agotado"
    return SolverReport(
        algorithm="pc_admm",
        converged=converged,
        iterations=k,
        final_err=err,
        trace=tuple(trace),
        certificate=_triplet(theta.x, t),
        elapsed_ms=elapsed_ms,
        beta=g.beta,
        message=message,
    )


def reference_solution(
    problem: ProblemInstance,
    params: PcAdmmParams,
    start: Optional[Triplet] = None,
    dtol: float = REFERENCE_DTOL,
    max_iter: int = REFERENCE_MAX_ITER,
) -> Triplet:
    """Continúa la misma recursión hasta ||d||_G <= dtol; sirve como theta* para la verificación de contracción."""
    g = resolve_metric(problem, params)
    theta = start if start is not None else default_start(problem)
    _check_start(problem, theta)
    kernel = _Kernel(problem.operator, problem.sets, problem.filtration, g.beta, g.r)
    alpha = params.alpha
    t = _arrays(theta)
    for k in range(max_iter):
        fx = kernel.operator(t.x)
        tt = kernel.predict(t, fx)
        d = kernel.direction(t, tt, fx, kernel.operator(tt.x))
        t = _Arrays(t.x - alpha * d.x, t.y - alpha * d.y, t.lam - alpha * d.lam)
        if np.sqrt(max(kernel.gnorm2(d), 0.0)) <= dtol:
            logger.debug("referencia PC-ADMM | iter=%s", k + 1)
            break
    else:
        logger.warning("referencia PC-ADMM sin alcanzar dtol=%.1e en %s iteraciones", dtol, max_iter)
    return _triplet(theta.x, t)
