from __future__ import annotations

import itertools
import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats

from cbtree.discrete import (
    DiscreteSnake,
    PlaneTree,
    discrete_stats,
    fit_label_scale,
    label_scale,
    sample_discrete_snake,
    sample_plane_tree,
)
from cbtree.rng import RandomStream


def dyck_paths(n):
    out = []
    for bits in itertools.product((1, -1), repeat=2 * n):
        s = np.cumsum(bits)
        if s[-1] == 0 and s.min() >= 0:
            out.append(bits)
    return out


def test_catalan_counts():
    assert [len(dyck_paths(n)) for n in (1, 2, 3, 4)] == [1, 2, 5, 14]


def test_single_edge():
    assert sample_plane_tree(1, 0).dyck.tolist() == [1, -1]


def test_uniform_n3_frequencies():
    g = np.random.default_rng(1)
    m = 100_000
    cnt = Counter(tuple(sample_plane_tree(3, g).dyck.tolist()) for _ in range(m))
    assert len(cnt) == 5
    p = 0.2
    se = math.sqrt(p * (1 - p) / m)
    for v in cnt.values():
        assert abs(v / m - p) <= 4 * se


@pytest.mark.parametrize("n", [2, 3, 4])
def test_uniform_chi_square(n):
    g = np.random.default_rng(n)
    paths = dyck_paths(n)
    m = 20_000
    cnt = Counter(tuple(sample_plane_tree(n, g).dyck.tolist()) for _ in range(m))
    obs = np.array([cnt.get(p, 0) for p in paths])
    assert obs.sum() == m
    assert stats.chisquare(obs).pvalue > 0.01


def test_kernel_matches_reference_sampler():
    # the batch kernel and the object sampler draw the same tree law
    d = discrete_stats(3, 50_000, np.random.default_rng(3), scale=1.0)
    h = d["height_mid"] * math.sqrt(6)
    ref = [sample_plane_tree(3, np.random.default_rng(10 + i)).contour()[3] for i in range(5000)]
    assert stats.ks_2samp(h[:5000], ref).pvalue > 0.01


@given(st.integers(1, 200), st.integers(0, 2**32))
def test_snake_invariants(n, seed):
    s = sample_discrete_snake(n, RandomStream(seed))
    c = np.cumsum(s.tree.dyck)
    assert c.min() >= 0 and c[-1] == 0
    assert s.labels[0] == 0
    par = s.tree.parents()
    assert np.all(np.abs(s.labels[1:] - s.labels[par[1:]]) <= 1)
    assert s.contour_labels().size == 2 * n + 1


def test_invalid_objects():
    with pytest.raises(ValueError):
        PlaneTree(np.array([-1, 1]))
    t = PlaneTree(np.array([1, 1, -1, -1]))
    with pytest.raises(ValueError):
        DiscreteSnake(t, np.array([0, 1, 3]))
    with pytest.raises(ValueError):
        DiscreteSnake(t, np.array([1, 1, 1]))


def test_uniform_vertex_label_mean():
    g = np.random.default_rng(4)
    x = np.array([sample_discrete_snake(50, g).labels[g.integers(0, 51)] for _ in range(20_000)])
    assert abs(x.mean()) <= 4 * x.std(ddof=1) / math.sqrt(x.size)


def test_positivity_acceptance_is_exact():
    # P(all labels >= 0) = 2 / (n + 2)
    n = 30
    d = discrete_stats(n, 4000, np.random.default_rng(5), positive=True)
    acc = d["trials"].size / d["trials"].sum()
    se = math.sqrt(acc * (1 - acc) / d["trials"].sum())
    assert abs(acc - 2 / (n + 2)) <= 4 * se


def test_label_scale_fit():
    fitted, theory = fit_label_scale(300, 20_000, np.random.default_rng(6))
    assert abs(fitted / theory - 1) < 0.10
    # out of sample: the mean max label matches the continuum value
    d = discrete_stats(300, 5000, np.random.default_rng(7), scale=fitted)
    assert abs(d["max"].mean() - 1.40) < 0.1 * 1.40
    assert label_scale(8) == pytest.approx(math.sqrt(2 / 3) * 2)
