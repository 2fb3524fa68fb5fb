import numpy as np
import pytest

from msvi.core.exceptions import ConfigError, TheoryViolation
from msvi.models.convex_sets import BoxSet, PointwiseSet
from msvi.models.filtration import Filtration
from msvi.models.operators import AffineOperator, CallbackOperator
from msvi.models.problems import ProblemInstance
from msvi.models.prob_space import Partition, RandomVector, SampleSpace
from msvi.models.solver import GMetric, PcAdmmParams, Triplet
from msvi.services.prob_space import l2_norm
from msvi.services.solver_pc_admm import (
    certify,
    correction_direction,
    default_start,
    g_norm,
    phi,
    predict,
    reference_solution,
    resolve_metric,
    solve,
)


def scalar_triplet(problem, x, y, lam) -> Triplet:
    template = RandomVector.zeros(problem.space, (1,))
    return Triplet(
        x=template.with_values([[x]]),
        y=template.with_values([[y]]),
        lam=template.with_values([[lam]]),
    )


def assert_triplet_close(a: Triplet, b: Triplet, atol: float) -> None:
    for name in ("x", "y", "lam"):
        np.testing.assert_allclose(getattr(a, name).values, getattr(b, name).values, atol=atol)


def test_g_norm_examples(make_single_atom):
    problem = make_single_atom()
    assert g_norm(scalar_triplet(problem, 0.0, 0.0, 0.0), GMetric(beta=2.0, r=3.0)) == 0.0
    theta = scalar_triplet(problem, 1.0, 1.0, 2.0)
    assert g_norm(theta, GMetric(beta=2.0, r=3.0)) == pytest.approx(np.sqrt(10.0))
    # con beta = r = 1 la métrica es la identidad
    identity = GMetric.model_construct(beta=1.0, r=1.0, lipschitz=0.0)
    assert g_norm(theta, identity) == pytest.approx(np.sqrt(6.0))


def test_metric_requires_large_enough_r():
    with pytest.raises(ValueError, match="r >"):
        GMetric(beta=1.0, r=1.5, lipschitz=1.0)


def test_predict_examples(make_single_atom):
    problem = make_single_atom()
    g = GMetric(beta=1.0, r=2.0)
    args = (problem.operator, problem.sets, problem.filtration, g)
    zero = scalar_triplet(problem, 0.0, 0.0, 0.0)
    assert_triplet_close(predict(zero, *args), zero, atol=0.0)
    moved = predict(scalar_triplet(problem, 1.0, 0.0, 0.0), *args)
    assert_triplet_close(moved, zero, atol=1e-15)


def test_predict_fixes_a_solution(affine_small):
    params = PcAdmmParams()
    g = resolve_metric(affine_small, params)
    ref = reference_solution(affine_small, params)
    tilde = predict(ref, affine_small.operator, affine_small.sets, affine_small.filtration, g)
    assert_triplet_close(tilde, ref, atol=1e-8)
    d = correction_direction(ref, tilde, affine_small.operator, g)
    assert g_norm(d, g) <= 1e-8


def test_correction_direction_examples(make_single_atom):
    problem = make_single_atom(matrix=0.0)
    g = GMetric(beta=1.0, r=2.0)
    theta = scalar_triplet(problem, 1.0, 0.0, 0.0)
    same = correction_direction(theta, theta, problem.operator, g)
    assert_triplet_close(same, scalar_triplet(problem, 0.0, 0.0, 0.0), atol=0.0)
    d = correction_direction(theta, scalar_triplet(problem, 0.0, 0.0, 0.0), problem.operator, g)
    assert_triplet_close(d, scalar_triplet(problem, 0.5, 0.0, 0.0), atol=1e-15)


def test_phi_examples(make_single_atom):
    problem = make_single_atom(matrix=0.0)
    g = GMetric(beta=1.0, r=2.0)
    theta = scalar_triplet(problem, 1.0, 0.0, 0.0)
    tilde = scalar_triplet(problem, 0.0, 0.0, 0.0)
    d = correction_direction(theta, tilde, problem.operator, g)
    assert phi(theta, theta, d, g) == 0.0
    # y = y~ y lam = lam~: solo queda <theta - theta~, G d> = beta r (x - x~) d_x
    assert phi(theta, tilde, d, g) == pytest.approx(1.0)
    assert phi(theta, tilde, d, g) >= 0.5 * g_norm(d, g) ** 2


def test_solve_from_stationary_start(make_single_atom):
    report = solve(make_single_atom(), PcAdmmParams(eps=1e-10))
    assert report.converged
    assert report.iterations == 0
    assert report.final_err < 1e-10
    assert report.trace == ()


def test_solve_respects_theory_along_trajectory(affine_small):
    params = PcAdmmParams(eps=1e-8, assert_theory=True)
    ref = reference_solution(affine_small, params)
    report = solve(affine_small, params, reference=ref)
    assert report.converged
    assert report.final_err < 1e-8
    assert len(report.trace) == report.iterations
    assert all(rec.phi >= 0.5 * rec.d_gnorm ** 2 - 1e-10 for rec in report.trace)
    cert = certify(report.certificate, affine_small.filtration, params.eps)
    assert cert.ok
    assert l2_norm(report.solution - ref.x) <= 1e-3


def test_solve_reports_non_convergence(affine_table):
    report = solve(affine_table, PcAdmmParams(eps=1e-12, max_iter=3))
    assert not report.converged
    assert report.iterations == 3
    assert "max_iter" in report.message


def test_underestimated_lipschitz_trips_theory_check(make_single_atom):
    base = make_single_atom()
    problem = ProblemInstance(
        space=base.space,
        filtration=base.filtration,
        sets=base.sets,
        operator=CallbackOperator(space=base.space, dim=1, func=lambda i, v: 10.0 * v, lipschitz=0.0),
    )
    start = scalar_triplet(problem, 1.0, 1.0, 0.0)
    with pytest.raises(TheoryViolation) as info:
        solve(problem, PcAdmmParams(assert_theory=True), start=start)
    assert info.value.inequality.startswith("phi")
    assert info.value.iteration == 0


def test_small_r_is_a_config_error(affine_small):
    with pytest.raises(ConfigError):
        resolve_metric(affine_small, PcAdmmParams(r=1.0))


def test_infeasible_start_is_rejected(make_single_atom):
    problem = make_single_atom()
    with pytest.raises(ConfigError, match="infactible"):
        solve(problem, PcAdmmParams(), start=scalar_triplet(problem, 2.0, 0.0, 0.0))


def test_default_start_is_feasible(affine_small):
    start = default_start(affine_small)
    assert np.all(np.abs(start.x.values) <= 1.0)
    np.testing.assert_array_equal(start.lam.values, 0.0)


def test_recovers_known_control(socp_small):
    report = solve(socp_small, PcAdmmParams(eps=1e-10, max_iter=100_000))
    assert report.converged
    assert l2_norm(report.solution - socp_small.known_solution) <= 1e-3


def test_rank_one_operator_orthogonal_to_power_start_keeps_theory():
    space = SampleSpace.uniform(1)
    e = np.array([2.0, 0.0, 0.0, -1.0])
    problem = ProblemInstance(
        space=space,
        filtration=Filtration(space=space, stages=(Partition.trivial(1),), stage_dims=(4,)),
        sets=PointwiseSet.uniform(space, (BoxSet.cube(4, -1.0, 1.0),)),
        operator=AffineOperator(space=space, matrices=[np.outer(e, e)], offsets=[[1.0, 0.0, 0.0, 0.0]]),
    )
    metric = resolve_metric(problem, PcAdmmParams())
    assert metric.lipschitz == pytest.approx(5.0, rel=1e-9)
    template = RandomVector.zeros(space, (4,))
    start = Triplet(
        x=template.with_values([[1.0, 0.0, 0.0, 0.0]]),
        y=template.with_values([[1.0, 0.0, 0.0, 0.0]]),
        lam=template,
    )
    report = solve(problem, PcAdmmParams(eps=1e-6, max_iter=100_000, assert_theory=True), start=start)
    assert report.converged
