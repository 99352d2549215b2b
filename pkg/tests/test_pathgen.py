from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats

from cbtree.pathgen import (
    ExcursionGrid,
    PathGrid,
    bessel_exact,
    brownian_bridge,
    excursion_height_h,
    normalized_excursion,
    sample_sigma_tail,
    scale_excursion,
    sigma_tail_mass,
)
from cbtree.rng import RandomStream


def test_pathgrid_duration_exact():
    p = PathGrid(0.0, 0.1, np.zeros(11))
    assert p.duration() == 10 * 0.1
    with pytest.raises(ValueError):
        PathGrid(0.0, 0.0, np.zeros(3))
    with pytest.raises(ValueError):
        PathGrid(0.0, 0.1, np.zeros(0))


def test_excursion_contract_enforced():
    with pytest.raises(ValueError):
        ExcursionGrid(0.0, 0.5, np.array([0.0, 0.0, 0.0]))
    with pytest.raises(ValueError):
        ExcursionGrid(0.0, 0.5, np.array([0.0, 1.0, 0.1]))


def test_bridge_one_step():
    p = brownian_bridge(1, 1.0, 0.0, 0.0, rng=1)
    assert np.array_equal(p.values, [0.0, 0.0])


def test_bridge_parameter_errors():
    with pytest.raises(ValueError):
        brownian_bridge(0, 1.0)
    with pytest.raises(ValueError):
        brownian_bridge(4, -1.0)


def test_bridge_midpoint_variance_and_mean():
    g = np.random.default_rng(11)
    x = np.array([brownian_bridge(8, 1.0, rng=g).values[4] for _ in range(100_000)])
    v = x.var(ddof=1)
    se = math.sqrt(2 / (x.size - 1)) * 0.25
    assert abs(v - 0.25) <= 4 * se
    y = np.array([brownian_bridge(8, 1.0, 3.0, 3.0, rng=g).values[4] for _ in range(20_000)])
    assert abs(y.mean() - 3.0) <= 4 * 0.5 / math.sqrt(y.size)


@given(st.integers(2, 64), st.integers(0, 2**32))
def test_excursion_invariants(n, seed):
    for method in ("vervaat", "bessel"):
        e = normalized_excursion(n, RandomStream(seed), method)
        assert e.values[0] == 0.0 and e.values[-1] == 0.0
        assert np.all(e.values[1:-1] > 0)
        assert e.duration() == pytest.approx(1.0, abs=1e-15)


def test_excursion_time_reversal():
    g = np.random.default_rng(2)
    n = 16
    a = np.empty(50_000)
    b = np.empty(50_000)
    for i in range(a.size):
        v = normalized_excursion(n, g).values
        a[i], b[i] = v[n // 4], v[n - n // 4]
    # two halves of independent draws to keep the samples independent
    assert stats.ks_2samp(a[::2], b[1::2]).pvalue > 0.01


def test_excursion_mean_max():
    g = np.random.default_rng(5)
    m = np.array([normalized_excursion(2048, g, "bessel").values.max() for _ in range(20_000)])
    se = m.std(ddof=1) / math.sqrt(m.size)
    # grid maxima sit below the continuum one by O(sqrt(dt)); allow that bias
    assert abs(m.mean() - math.sqrt(math.pi / 2)) <= 3 * se + 0.6 * math.sqrt(1 / 2048)


def test_bessel_moments():
    for dim, x0, T in [(3, 0.0, 1.0), (9, 0.0, 1.0), (9, 2.0, 0.5)]:
        g = np.random.default_rng(dim)
        r = np.array([bessel_exact(dim, x0, 2, T, g).values[-1] for _ in range(40_000)])
        r2 = r ** 2
        assert abs(r2.mean() - (x0 ** 2 + dim * T)) <= 4 * r2.std(ddof=1) / math.sqrt(r2.size)


def test_bessel_inverse_fourth_moment():
    g = np.random.default_rng(4)
    r = np.array([bessel_exact(9, 0.0, 1, 1.0, g).values[-1] for _ in range(100_000)]) ** -4.0
    assert abs(r.mean() - 1 / 35) <= 3 * r.std(ddof=1) / math.sqrt(r.size)


def test_bessel_short_time_and_errors():
    g = np.random.default_rng(0)
    for _ in range(100):
        assert abs(bessel_exact(9, 5.0, 4, 1e-6, g).values[-1] - 5.0) < 1e-2
    with pytest.raises(NotImplementedError):
        bessel_exact(2.5, 0.0, 4, 1.0)
    with pytest.raises(NotImplementedError):
        bessel_exact(17, 0.0, 4, 1.0)


def test_height_h_contract():
    g = np.random.default_rng(9)
    for h in (0.5, 1.0, 2.0):
        e = excursion_height_h(h, 64, g)
        assert e.values.max() == h
        assert np.sum(e.values == h) == 1
        k = int(np.argmax(e.values))
        assert 0 < k < e.n


def test_height_h_scaling():
    g = np.random.default_rng(12)
    d1 = np.array([excursion_height_h(1.0, 64, g).duration() for _ in range(3000)])
    d2 = np.array([excursion_height_h(2.0, 64, g).duration() / 4 for _ in range(3000)])
    assert stats.ks_2samp(d1, d2).pvalue > 0.01


def test_height_h_duration_mean():
    # E[duration] of a height-1 excursion is twice the mean Bessel(3) passage time 1/3
    g = np.random.default_rng(13)
    d = np.array([excursion_height_h(1.0, 256, g).duration() for _ in range(4000)])
    assert abs(d.mean() - 2 / 3) <= 4 * d.std(ddof=1) / math.sqrt(d.size) + 0.05


def test_sigma_tail():
    assert sigma_tail_mass(1.0) == pytest.approx((2 * math.pi) ** -0.5, rel=1e-15)
    s, mass = sample_sigma_tail(0.3, np.random.default_rng(1), size=100_000)
    assert np.all(s >= 0.3)
    grid = np.geomspace(0.3, 300, 50)
    ecdf = np.searchsorted(np.sort(s), grid, side="right") / s.size
    dkw = math.sqrt(math.log(2 / 0.01) / (2 * s.size))
    assert np.max(np.abs(ecdf - (1 - np.sqrt(0.3 / grid)))) <= dkw
    with pytest.raises(ValueError):
        sample_sigma_tail(0.0)


def test_scaling_matches_direct_duration():
    g = np.random.default_rng(21)
    lam = 4.0
    a = [scale_excursion(normalized_excursion(64, g), lam) for _ in range(4000)]
    b = [normalized_excursion(64, g) for _ in range(4000)]
    assert stats.ks_2samp([p.values.max() / 2 for p in a], [p.values.max() for p in b]).pvalue > 0.01
    assert stats.ks_2samp([p.values[32] / 2 for p in a], [p.values[32] for p in b]).pvalue > 0.01
    assert a[0].duration() == pytest.approx(lam)


def test_determinism():
    a = normalized_excursion(128, RandomStream(3, 4)).values
    b = normalized_excursion(128, RandomStream(3, 4)).values
    assert a.tobytes() == b.tobytes()
