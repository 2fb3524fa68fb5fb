import numpy as np
import pytest
from pydantic import ValidationError

from msvi.core.exceptions import ShapeError
from msvi.models.filtration import Filtration
from msvi.models.prob_space import Partition, RandomVector, SampleSpace
from msvi.services.filtration import (
    filtration_from_signals,
    is_nonanticipative,
    project_complement,
    project_nonanticipativity,
    two_stage,
)
from msvi.services.prob_space import l2_inner


def test_first_stage_must_be_trivial():
    space = SampleSpace.uniform(2)
    with pytest.raises(ValidationError, match="trivial"):
        Filtration(space=space, stages=(Partition.finest(2),), stage_dims=(1,))


def test_stages_must_refine():
    space = SampleSpace.uniform(4)
    coarse = Partition(atom_count=4, cells=((0, 1), (2, 3)))
    crossing = Partition(atom_count=4, cells=((0, 2), (1, 3)))
    with pytest.raises(ValidationError, match="no refina"):
        Filtration(
            space=space,
            stages=(Partition.trivial(4), coarse, crossing),
            stage_dims=(1, 1, 1),
        )


def test_stage_dims_must_match_stage_count():
    space = SampleSpace.uniform(2)
    with pytest.raises(ValidationError):
        Filtration(space=space, stages=(Partition.trivial(2),), stage_dims=(1, 1))


def test_filtration_from_signals_groups_by_prefix(three_stage):
    assert three_stage.stages[1].cells == ((0, 1), (2, 3))
    assert three_stage.stages[2].cell_count == 4
    assert three_stage.dimension == 4


def test_filtration_from_signals_needs_n_minus_one_signals(space4):
    with pytest.raises(ShapeError):
        filtration_from_signals(space4, [np.zeros(4)], (1, 1, 1))


def test_two_stage_layout():
    space = SampleSpace(probabilities=[0.5, 0.5])
    f = two_stage(space, 1, 1)
    x = RandomVector(space=space, values=[[1.0, 5.0], [3.0, 9.0]], blocks=(1, 1))
    np.testing.assert_allclose(project_nonanticipativity(x, f).values, [[2.0, 5.0], [2.0, 9.0]])
    np.testing.assert_allclose(project_complement(x, f).values, [[-1.0, 0.0], [1.0, 0.0]])


def test_measurable_vector_is_fixed(three_stage, space4):
    x = RandomVector(
        space=space4,
        values=[[2.0, 1.0, 0.0, 5.0], [2.0, 1.0, 0.0, 6.0], [2.0, -1.0, 3.0, 7.0], [2.0, -1.0, 3.0, 8.0]],
        blocks=(1, 2, 1),
    )
    np.testing.assert_allclose(project_nonanticipativity(x, three_stage).values, x.values)
    np.testing.assert_allclose(project_complement(x, three_stage).values, 0.0, atol=1e-14)
    assert is_nonanticipative(x, three_stage)


def test_zero_maps_to_zero(three_stage, space4):
    zero = RandomVector.zeros(space4, (1, 2, 1))
    assert project_nonanticipativity(zero, three_stage) == zero
    assert project_complement(zero, three_stage) == zero


def test_block_mismatch(three_stage, space4):
    x = RandomVector.zeros(space4, (2, 1, 1))
    with pytest.raises(ShapeError):
        project_nonanticipativity(x, three_stage)


def test_complement_has_zero_conditional_expectation(three_stage, space4, rng):
    x = RandomVector(space=space4, values=rng.standard_normal((4, 4)), blocks=(1, 2, 1))
    comp = project_complement(x, three_stage)
    np.testing.assert_allclose(project_nonanticipativity(comp, three_stage).values, 0.0, atol=1e-12)
    assert not is_nonanticipative(x, three_stage)
    y = RandomVector(space=space4, values=rng.standard_normal((4, 4)), blocks=(1, 2, 1))
    assert abs(l2_inner(project_nonanticipativity(x, three_stage), project_complement(y, three_stage))) <= 1e-10
