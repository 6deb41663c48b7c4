import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bondopt.errors import DomainError
from bondopt.sampling import latin_hypercube, lhs_matrix
from bondopt.simulator import bonding_space


def strata_of(column, n):
    return np.floor(column * n).astype(int)


def test_single_point():
    plan = lhs_matrix(1, 3, np.random.default_rng(0))
    assert plan.matrix.shape == (1, 3)
    assert np.all(plan.matrix >= 0.0) and np.all(plan.matrix < 1.0)


def test_quartile_strata():
    plan = lhs_matrix(4, 2, np.random.default_rng(1))
    for j in range(2):
        assert sorted(strata_of(plan.matrix[:, j], 4)) == [0, 1, 2, 3]


def test_zero_samples_rejected():
    with pytest.raises(DomainError):
        lhs_matrix(0, 2, np.random.default_rng(0))


def test_bonding_batch_of_30():
    space = bonding_space()
    designs = latin_hypercube(30, space, np.random.default_rng(2))
    assert len(designs) == 30
    for point in designs:
        space.validate(point.values)
    # continuous dimensions keep their stratification through decoding
    for j, dim in enumerate(space.dimensions):
        if dim.kind != "continuous":
            continue
        column = np.array([p.unit[j] for p in designs])
        assert sorted(strata_of(column, 30)) == list(range(30))


@settings(max_examples=60, deadline=None)
@given(
    n=st.integers(min_value=2, max_value=50),
    d=st.integers(min_value=1, max_value=8),
    seed=st.integers(min_value=0, max_value=2**32 - 1),
)
def test_stratification_property(n, d, seed):
    plan = lhs_matrix(n, d, np.random.default_rng(seed))
    for j in range(d):
        assert sorted(strata_of(plan.matrix[:, j], n)) == list(range(n))


def test_same_seed_same_plan():
    a = lhs_matrix(12, 4, np.random.default_rng(33))
    b = lhs_matrix(12, 4, np.random.default_rng(33))
    assert np.array_equal(a.matrix, b.matrix)
