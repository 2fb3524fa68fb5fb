from __future__ import annotations

import numpy as np
import pytest

from msvi.models.convex_sets import BoxSet, PointwiseSet, WholeSpace
from msvi.models.filtration import Filtration
from msvi.models.operators import AffineOperator
from msvi.models.problems import ProblemInstance
from msvi.models.prob_space import Partition, RandomVector, SampleSpace
from msvi.services.filtration import filtration_from_signals, two_stage
from msvi.services.problems import gen_random_affine, gen_random_walk_socp


def single_atom_problem(matrix=1.0, offset=0.0, low=-1.0, high=1.0) -> ProblemInstance:
    """Un átomo, una etapa, F(x) = matrix x + offset, C = [low, high]."""
    space = SampleSpace(probabilities=[1.0])
    filtration = Filtration(space=space, stages=(Partition.trivial(1),), stage_dims=(1,))
    return ProblemInstance(
        space=space,
        filtration=filtration,
        sets=PointwiseSet.uniform(space, (BoxSet(lower=(low,), upper=(high,)),)),
        operator=AffineOperator(space=space, matrices=[[[matrix]]], offsets=[[offset]]),
    )


@pytest.fixture
def make_single_atom():
    return single_atom_problem


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def space4():
    return SampleSpace(probabilities=[0.1, 0.2, 0.3, 0.4])


@pytest.fixture
def three_stage(space4):
    """Tres etapas sobre 4 átomos: trivial, {0,1}{2,3}, discreta."""
    signals = [np.array([0, 0, 1, 1]), np.array([0, 1, 0, 1])]
    return filtration_from_signals(space4, signals, (1, 2, 1))


@pytest.fixture
def affine_small():
    return gen_random_affine(4, 2, 2, seed=3)


@pytest.fixture
def affine_table():
    return gen_random_affine(10, 5, 5, seed=0)


@pytest.fixture
def socp_small():
    return gen_random_walk_socp(3, 2)


@pytest.fixture
def identity_unconstrained():
    """Dos etapas, C = R^2, F = identidad, b = 0: única solución x = 0."""
    space = SampleSpace(probabilities=[0.25, 0.25, 0.5])
    m, n = 3, 2
    return ProblemInstance(
        space=space,
        filtration=two_stage(space, 1, 1),
        sets=PointwiseSet.uniform(space, (WholeSpace(dim=1), WholeSpace(dim=1))),
        operator=AffineOperator(space=space, matrices=np.tile(np.eye(n), (m, 1, 1)), offsets=np.zeros((m, n))),
    )


def random_vector(space: SampleSpace, blocks, rng) -> RandomVector:
    return RandomVector(space=space, values=rng.standard_normal((space.atom_count, sum(blocks))), blocks=tuple(blocks))
