import numpy as np
import pytest
from pydantic import ValidationError

from msvi.core.exceptions import ShapeError, StructureError
from msvi.models.prob_space import Partition, RandomVector, SampleSpace
from msvi.services.prob_space import conditional_expectation, l2_inner, l2_norm


def rv(probs, rows, blocks=None):
    space = SampleSpace(probabilities=probs)
    return RandomVector(space=space, values=rows, blocks=blocks or ())


def test_sample_space_rejects_zero_probability():
    with pytest.raises(ValidationError, match="probabilidad"):
        SampleSpace(probabilities=[0.5, 0.5, 0.0])


def test_sample_space_rejects_bad_sum():
    with pytest.raises(ValidationError, match="suman"):
        SampleSpace(probabilities=[0.5, 0.4])


def test_uniform_space():
    space = SampleSpace.uniform(8)
    assert space.atom_count == 8
    assert space.probabilities.sum() == pytest.approx(1.0)
    with pytest.raises(ValueError):
        space.probabilities[0] = 1.0


def test_random_vector_default_blocks_and_shape():
    x = rv([0.5, 0.5], [1.0, -1.0])
    assert x.values.shape == (2, 1)
    assert x.blocks == (1,)
    with pytest.raises(ValidationError):
        RandomVector(space=x.space, values=np.zeros((3, 1)), blocks=(1,))
    with pytest.raises(ValidationError, match="no suman"):
        RandomVector(space=x.space, values=np.zeros((2, 3)), blocks=(1, 1))


def test_random_vector_arithmetic_and_blocks():
    space = SampleSpace.uniform(2)
    a = RandomVector(space=space, values=[[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]], blocks=(1, 2))
    b = 2.0 * a - a
    assert b == a
    np.testing.assert_array_equal(a.block(1), [[2.0, 3.0], [5.0, 6.0]])
    np.testing.assert_array_equal((-a).values, -a.values)
    other = RandomVector(space=SampleSpace.uniform(3), values=np.zeros((3, 3)), blocks=(1, 2))
    with pytest.raises(ShapeError):
        a + other


@pytest.mark.parametrize(
    "probs, a, b, expected",
    [
        ([0.5, 0.5], [0.0, 0.0], [0.0, 0.0], 0.0),
        ([0.25, 0.75], [4.0, 8.0], [1.0, 1.0], 7.0),
        ([1.0], [3.0], [2.0], 6.0),
    ],
)
def test_l2_inner_examples(probs, a, b, expected):
    space = SampleSpace(probabilities=probs)
    x = RandomVector(space=space, values=a)
    y = RandomVector(space=space, values=b)
    assert l2_inner(x, y) == pytest.approx(expected)
    assert l2_inner(y, x) == pytest.approx(expected)


def test_l2_inner_shape_mismatch():
    space = SampleSpace.uniform(2)
    x = RandomVector(space=space, values=np.zeros((2, 1)))
    y = RandomVector(space=space, values=np.zeros((2, 2)))
    with pytest.raises(ShapeError):
        l2_inner(x, y)


def test_l2_norm_examples():
    assert l2_norm(rv([0.5, 0.5], [0.0, 0.0])) == 0.0
    assert l2_norm(rv([0.5, 0.5], [1.0, -1.0])) == pytest.approx(1.0)
    assert l2_norm(rv([1.0], [[3.0, 4.0]])) == pytest.approx(5.0)


def test_partition_validation():
    with pytest.raises(ValidationError, match="no cubre"):
        Partition(atom_count=3, cells=((0,), (1,)))
    with pytest.raises(ValidationError, match="superpone"):
        Partition(atom_count=3, cells=((0, 1), (1, 2)))
    with pytest.raises(ValidationError, match="vacía"):
        Partition(atom_count=2, cells=((0, 1), ()))


def test_partition_from_labels_and_refines():
    p = Partition.from_labels([7, 7, 3, 3, 7])
    assert p.cells == ((0, 1, 4), (2, 3))
    assert Partition.finest(5).refines(p)
    assert p.refines(Partition.trivial(5))
    assert not Partition.trivial(5).refines(p)
    rows = Partition.from_labels(np.array([[0, 1], [0, 1], [1, 0]]))
    assert rows.cells == ((0, 1), (2,))


def test_conditional_expectation_finest_is_identity():
    a = rv([0.2, 0.3, 0.5], [1.0, 2.0, 3.0])
    out = conditional_expectation(a, Partition.finest(3))
    np.testing.assert_array_equal(out.values, a.values)


def test_conditional_expectation_coarsest():
    a = rv([0.25, 0.75], [4.0, 8.0])
    out = conditional_expectation(a, Partition.trivial(2))
    np.testing.assert_allclose(out.values, [[7.0], [7.0]])


def test_conditional_expectation_cells():
    a = rv([0.25] * 4, [1.0, 3.0, 5.0, 7.0])
    g = Partition(atom_count=4, cells=((0, 1), (2, 3)))
    np.testing.assert_allclose(conditional_expectation(a, g).values, [[2.0], [2.0], [6.0], [6.0]])


def test_conditional_expectation_wrong_space():
    a = rv([0.5, 0.5], [1.0, 2.0])
    with pytest.raises(StructureError):
        conditional_expectation(a, Partition.trivial(3))


def test_conditional_expectation_properties(rng):
    space = SampleSpace(probabilities=rng.dirichlet(np.ones(6)))
    a = RandomVector(space=space, values=rng.standard_normal((6, 2)))
    b = RandomVector(space=space, values=rng.standard_normal((6, 2)))
    h = Partition(atom_count=6, cells=((0,), (1, 2), (3,), (4, 5)))
    g = Partition(atom_count=6, cells=((0, 1, 2), (3, 4, 5)))

    tower = conditional_expectation(conditional_expectation(a, h), g)
    np.testing.assert_allclose(tower.values, conditional_expectation(a, g).values, atol=1e-12)

    ce = conditional_expectation(a, g)
    const = conditional_expectation(b, g)
    assert abs(l2_inner(a - ce, const)) <= 1e-10
    assert l2_norm(ce) <= l2_norm(a) + 1e-15

    lin = conditional_expectation(2.0 * a + (-3.0) * b, g)
    np.testing.assert_allclose(
        lin.values,
        2.0 * ce.values - 3.0 * conditional_expectation(b, g).values,
        atol=1e-12,
    )
