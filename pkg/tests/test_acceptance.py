"""Suites completas sobre la familia afín aleatoria y el árbol de caminatas; se corren con `pytest -m slow`."""

import time

import numpy as np
import pytest

from msvi.models.solver import PcAdmmParams, PhaParams
from msvi.services import solver_pc_admm, solver_pha
from msvi.services.convex_sets import sample_feasible
from msvi.services.operators import extensive_form_gap
from msvi.services.prob_space import l2_norm
from msvi.services.problems import gen_random_affine, gen_random_walk_socp

pytestmark = pytest.mark.slow

SEEDS = range(20)


@pytest.fixture(scope="module")
def suite():
    return [gen_random_affine(10, 5, 5, seed=s) for s in SEEDS]


def test_cross_solver_agreement(suite):
    # eps = 1e-8 cumple Err < 1e-5 y deja margen frente al condicionamiento de las instancias
    for problem in suite:
        admm = solver_pc_admm.solve(problem, PcAdmmParams(eps=1e-8))
        pha = solver_pha.solve(problem, PhaParams(eps=1e-8))
        assert admm.converged and pha.converged, problem.seed
        assert admm.final_err < 1e-5 and pha.final_err < 1e-5
        assert l2_norm(admm.solution - pha.solution) <= 1e-4, problem.seed


@pytest.mark.parametrize("eps", [1e-3, 1e-5])
def test_pc_admm_is_faster_with_more_iterations(suite, eps):
    admm_time, pha_time, admm_iter, pha_iter = [], [], [], []
    for problem in suite:
        admm = solver_pc_admm.solve(problem, PcAdmmParams(eps=eps))
        pha = solver_pha.solve(problem, PhaParams(eps=eps))
        assert admm.converged and pha.converged
        admm_time.append(admm.elapsed_ms)
        pha_time.append(pha.elapsed_ms)
        admm_iter.append(admm.iterations)
        pha_iter.append(pha.iterations)
    assert np.mean(admm_time) < np.mean(pha_time)
    assert np.mean(admm_iter) > np.mean(pha_iter)


def test_theory_holds_on_every_run(suite):
    params = PcAdmmParams(eps=1e-5, assert_theory=True)
    for problem in suite:
        reference = solver_pc_admm.reference_solution(problem, params)
        report = solver_pc_admm.solve(problem, params, reference=reference)
        assert report.converged, problem.seed


def test_known_control_within_a_minute():
    problem = gen_random_walk_socp(3, 2)
    t0 = time.perf_counter()
    report = solver_pc_admm.solve(problem, PcAdmmParams(eps=1e-10, max_iter=200_000))
    assert time.perf_counter() - t0 < 60.0
    assert l2_norm(report.solution - problem.known_solution) <= 1e-3


def test_extensive_form_gap_on_certified_solutions(suite):
    rng = np.random.default_rng(2024)
    for problem in suite[:5]:
        report = solver_pc_admm.solve(problem, PcAdmmParams(eps=1e-10))
        assert report.converged
        x, v = report.solution, -report.certificate.lam
        for _ in range(100):
            z = sample_feasible(problem.sets, rng)
            assert extensive_form_gap(problem.operator, x, v, z).min() >= -1e-8
