import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fbmdrift.grid import SampledPath, TimeGrid, make_grid


def test_nodes_small_grid():
    assert make_grid(1.0, 4).nodes.tolist() == [0.0, 0.25, 0.5, 0.75, 1.0]


def test_single_step():
    g = make_grid(2.0, 1)
    assert g.nodes.tolist() == [0.0, 2.0]
    assert len(g) == 2


@pytest.mark.parametrize("T,n", [(0.0, 4), (-1.0, 4), (1.0, 0), (math.inf, 4), (math.nan, 3), (1.0, 2.5)])
def test_rejects_bad_grids(T, n):
    with pytest.raises(ValueError):
        make_grid(T, n)


@given(st.floats(1e-3, 1e3), st.integers(1, 5000))
def test_grid_invariants(T, n):
    g = TimeGrid(T, n)
    t = g.nodes
    assert t[0] == 0.0 and t[-1] == T
    steps = np.diff(t)
    assert np.all(steps > 0)
    assert np.allclose(steps, T / n, rtol=1e-9, atol=0)
    assert abs(steps.sum() - T) <= n * np.spacing(T)


def test_nodes_read_only():
    g = make_grid(1.0, 4)
    with pytest.raises(ValueError):
        g.nodes[1] = 3.0


def test_refine_and_equality():
    g = make_grid(1.0, 8)
    assert g.refine(2) == make_grid(1.0, 16)
    assert g.key() == (1.0, 8)


def test_sampled_path_validation():
    g = make_grid(1.0, 4)
    SampledPath(g, np.zeros(5))
    with pytest.raises(ValueError):
        SampledPath(g, np.zeros(4))
    with pytest.raises(ValueError):
        SampledPath(g, [0, 1, np.nan, 2, 3])


def test_sampled_path_reverse_and_subsample():
    g = make_grid(1.0, 4)
    p = SampledPath(g, [0, 1, 2, 3, 4])
    assert p.reversed().values.tolist() == [4, 3, 2, 1, 0]
    sub = p.subsample(2)
    assert sub.grid == make_grid(1.0, 2)
    assert sub.values.tolist() == [0, 2, 4]
    with pytest.raises(ValueError):
        p.subsample(3)
