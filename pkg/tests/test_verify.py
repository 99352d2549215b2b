from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import integrate

from cbtree.batch import basic_batch
from cbtree.report import FAIL, PASS, EstimateReport, mc_verdict
from cbtree.rng import RandomStream
from cbtree.verify import (
    check_bessel_girsanov,
    check_g0,
    check_hitting_constant,
    check_laplace_coth,
    check_laplace_small_lambda,
    check_marginal_p1,
    check_uniform_positivity,
    g0_integrand,
    hitting_target,
    laplace_target,
    marginal_p1_rhs,
)


def test_g0_reduction_oracle():
    # u = 1/r^2 turns int r^-3 exp(-3/(2 r^2)) dr into (1/2) int exp(-3u/2) du = 1/3
    val = integrate.quad(lambda u: 0.5 * math.exp(-1.5 * u), 0, math.inf)[0]
    assert val == pytest.approx(1 / 3, rel=1e-12)
    assert math.gamma(3.5) / math.gamma(4.5) == pytest.approx(2 / 7, rel=1e-14)
    r = check_g0()
    assert r.verdict == PASS
    assert abs(r.estimate - 2 / 21) <= 1e-8
    assert r.details["refined_change"] < 1e-10


def test_g0_integrand_positive():
    r = np.geomspace(0.05, 1e3, 200)
    assert all(g0_integrand(x) > 0 for x in r)
    assert g0_integrand(1e-3) >= 0


def test_targets():
    assert hitting_target(1.0) == 1.5 and hitting_target(2.0) == 0.375
    c = 2 ** 0.25
    coth = math.cosh(c) / math.sinh(c)
    assert laplace_target(1.0, 1.0) == pytest.approx(math.sqrt(0.5) * (3 * coth ** 2 - 2), rel=1e-12)
    assert laplace_target(5.0, 1.0) == pytest.approx(math.sqrt(0.5), rel=1e-3)


def test_small_lambda_consistency():
    for x in (1.0, 2.0):
        assert check_laplace_small_lambda(x).verdict == PASS


def test_marginal_rhs_closed_form():
    assert marginal_p1_rhs(0.5, 1.5) == pytest.approx(4 / 105, rel=1e-14)
    assert marginal_p1_rhs(1.0, 1.0) == 0.0
    assert 0 < marginal_p1_rhs(0.5, 1.5, 1.0) < 4 / 105


def test_verdict_policy():
    assert mc_verdict(1.0, 0.1, 1.3) == PASS
    assert mc_verdict(1.0, 0.01, 1.3) == FAIL
    r = EstimateReport("x", "y", 1.0, 0.1, 10, 1.0, PASS)
    assert r.passed and '"runtime_s"' not in r.to_json(include_runtime=False)


@pytest.fixture(scope="module")
def small_batch():
    return basic_batch(30_000, 128, RandomStream(11))


def test_positivity_small(small_batch):
    for p in (1, 2, 3):
        r = check_uniform_positivity(p, 30_000, 128, batch=small_batch)
        assert r.verdict == PASS, r.summary()


def test_hitting_and_laplace_small(small_batch):
    d = -small_batch["w_min"]
    assert check_hitting_constant(1.0, depth=d, rel=0.1).verdict == PASS
    assert check_hitting_constant(5.0, depth=d, rel=1.0).estimate <= 0.07
    assert check_laplace_coth(5.0, 1.0, depth=d, rel=0.05).verdict == PASS


def test_girsanov_small():
    r = check_bessel_girsanov(1.0, 1.0, "one", 20_000, RandomStream(12), n_steps=500)
    assert abs(r.details["z"]) <= 4 and r.details["rhs_bound"] <= 1
    r = check_bessel_girsanov(3.0, 0.1, "one", 20_000, RandomStream(13), n_steps=500)
    assert abs(r.estimate - 1) < 0.1


def test_marginal_degenerate_window():
    r = check_marginal_p1(1.0, 1.0, None, 200, RandomStream(14), n=64)
    assert r.estimate == 0.0 and r.target == 0.0
