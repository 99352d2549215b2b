from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats

from cbtree.batch import basic_batch
from cbtree.discrete import sample_plane_tree
from cbtree.pathgen import ExcursionGrid, PathGrid, normalized_excursion
from cbtree.reroot import (
    SparseTableMin,
    exact_conditioned_sample,
    reconstruct_path,
    reroot_head,
    reroot_lifetimes,
)
from cbtree.rng import RandomStream
from cbtree.snake import SnakeSample, ise_histogram, sample_snake


@given(st.lists(st.floats(-10, 10), min_size=1, max_size=60), st.data())
def test_sparse_table(values, data):
    a = np.array(values)
    t = SparseTableMin(a)
    i = data.draw(st.integers(0, a.size - 1))
    j = data.draw(st.integers(i, a.size - 1))
    assert t.query(i, j) == a[i : j + 1].min()


def test_hand_example():
    z = ExcursionGrid(0.0, 0.25, np.array([0.0, 1.0, 0.5, 1.0, 0.0]))
    out = reroot_lifetimes(z, 0.5)
    assert np.allclose(out.values, [0.0, 0.5, 0.5, 0.5, 0.0])


def test_identity_reroot():
    s = sample_snake(64, RandomStream(1), engine="grid")
    r = reroot_head(s, 0.0)
    assert np.array_equal(r.zeta.values, s.zeta.values)
    assert np.array_equal(r.head.values, s.head.values)


@given(st.integers(2, 64), st.integers(0, 2**32), st.data())
def test_reroot_fuzz(n, seed, data):
    z = normalized_excursion(n, RandomStream(seed))
    k = data.draw(st.integers(0, n - 1))
    out = reroot_lifetimes(z, k * z.dt)
    assert out.values[-1] == 0.0 and out.values[0] == 0.0
    assert out.duration() == pytest.approx(z.duration(), rel=1e-15)


def test_off_grid_warns():
    z = ExcursionGrid(0.0, 0.25, np.array([0.0, 1.0, 0.5, 1.0, 0.0]))
    with pytest.warns(UserWarning):
        reroot_lifetimes(z, 0.3)


def test_reroot_at_min():
    s = sample_snake(128, RandomStream(2))
    r = reroot_head(s, s.s_star)
    assert r.head.values.min() == 0.0
    assert r.head.values[0] == 0.0
    assert r.sigma == s.sigma
    assert r.floor_offset >= 0.0


def test_involution():
    s = sample_snake(64, RandomStream(3), engine="grid")
    k = 20
    r = reroot_head(s, k * s.dt)
    back = reroot_head(r, (s.n - k) * s.dt)
    assert np.allclose(back.head.values, s.head.values)


def test_involution_on_tree_contour():
    # on a tree contour (unit steps) grid distances are exact tree distances;
    # plant the tree on an extra edge and re-root at leaves (visited once)
    t = sample_plane_tree(40, np.random.default_rng(8))
    c = np.concatenate([[0.0], 1.0 + t.contour(), [0.0]])
    z = ExcursionGrid(0.0, 1.0 / (c.size - 1), c)
    leaves = [k for k in range(1, c.size - 1) if c[k - 1] < c[k] > c[k + 1]]
    for k in leaves[:5]:
        r = reroot_lifetimes(z, k * z.dt)
        back = reroot_lifetimes(r, (z.n - k) * z.dt)
        assert np.array_equal(back.values, c)


def test_reroot_interval_min_is_consistent():
    # exact in-step minima can only lower the interval infima
    s = sample_snake(64, RandomStream(4))
    a = reroot_lifetimes(s.zeta, 10 * s.dt)
    b = reroot_lifetimes(s.zeta, 10 * s.dt, s.interval_min)
    assert np.all(b.values >= a.values - 1e-12)


def test_uniform_reroot_invariance_max():
    a = basic_batch(20_000, 128, RandomStream(5, 0), stop=np.inf)
    b = basic_batch(20_000, 128, RandomStream(5, 1), stop=np.inf)
    assert stats.ks_2samp(a["grid_max"], b["max_u"]).pvalue > 0.01


def test_reconstruct_toy():
    z = ExcursionGrid(0.0, 0.25, np.array([0.0, 1.0, 0.5, 1.0, 0.0]))
    h = PathGrid(0.0, 0.25, np.array([0.0, 2.0, 1.0, 3.0, 0.0]))
    s = SnakeSample(z, h)
    # at r = 3/4: level t <= 0.5 was last reached on [1/2, 3/4], above on the rise from 1/2
    t, v = reconstruct_path(s, 0.75, dh=0.25)
    assert np.allclose(t, [0.0, 0.25, 0.5, 0.75, 1.0])
    assert np.allclose(v, [0.0, 0.5, 1.0, 2.0, 3.0])
    t, v = reconstruct_path(s, 0.25, dh=0.5)
    assert np.allclose(t, [0.0, 0.5, 1.0])
    assert np.allclose(v, [0.0, 1.0, 2.0])


def test_reconstruct_tip_and_root():
    s = sample_snake(64, RandomStream(6), engine="grid")
    k = int(np.argmax(s.zeta.values))
    t, v = reconstruct_path(s, k * s.dt)
    assert v[0] == 0.0
    assert t[-1] == s.zeta.values[k] and v[-1] == s.head.values[k]


def test_exact_conditioned():
    g = np.random.default_rng(7)
    maxes = []
    for _ in range(200):
        r = exact_conditioned_sample(128, rng=g)
        assert r.head.values.min() == 0.0
        assert ise_histogram(r, [-1.0, 0.0, r.head.values.max() + 1]).masses[0] == 0.0
        assert np.mean(r.head.values[1:-1] > 0) >= 1 - 2 / 128
        maxes.append(r.head.values.max())
    assert 0 < np.mean(maxes) < np.inf
