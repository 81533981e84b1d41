import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from rpst.privacy import (
    PrivacyBudget,
    compose,
    laplace_from_uniform,
    laplace_sample,
    private_group_disparity,
    privatize,
)
from rpst.stats import null_variance
from rpst.transforms import TransformSpec

from conftest import FixedUniforms


def test_laplace_median_and_quartile():
    assert laplace_sample(1.0, FixedUniforms(0.5)) == 0.0
    assert laplace_sample(1.0, FixedUniforms(0.75)) == pytest.approx(math.log(2), rel=1e-15)
    assert laplace_sample(3.0, FixedUniforms(0.25)) == pytest.approx(-3 * math.log(2), rel=1e-15)


@given(st.floats(1e-9, 1 - 1e-9))
def test_laplace_inverse_cdf_roundtrip(u):
    x = laplace_from_uniform(u, 2.0)
    assert stats.laplace.cdf(x, scale=2.0) == pytest.approx(u, rel=1e-9, abs=1e-12)


def test_laplace_zero_uniform_is_redrawn():
    assert math.isfinite(laplace_sample(1.0, FixedUniforms(0.0, 0.3)))


@pytest.mark.parametrize("scale", [0.5, 4.0])
def test_laplace_variance(rng, scale):
    draws = laplace_sample(scale, rng, size=100_000)
    assert draws.var() == pytest.approx(2 * scale**2, rel=0.05)


def test_laplace_ks(rng):
    draws = laplace_sample(1.5, rng, size=100_000)
    assert stats.kstest(draws, stats.laplace(scale=1.5).cdf).statistic < 0.01


def test_laplace_zero_scale_is_exact():
    r = FixedUniforms(0.9)
    assert laplace_sample(0.0, r) == 0.0 and r.calls == 0


def test_laplace_bad_scale():
    with pytest.raises(ValueError):
        laplace_sample(-1.0, FixedUniforms())


def test_privatize_examples():
    assert privatize(2.0, 4.5, 1.0, FixedUniforms(0.5)) == (2.0, 4.5)
    val, scale = privatize(2.0, 4.5, 1.0, FixedUniforms(0.75))
    assert val == pytest.approx(2.0 + 4.5 * math.log(2)) and val == pytest.approx(5.119, abs=5e-4)
    val, scale = privatize(2.0, 4.5, math.inf, FixedUniforms(0.99))
    assert (val, scale) == (2.0, 0.0)
    with pytest.raises(ValueError):
        privatize(1.0, 0.0, 1.0, FixedUniforms())


def test_disparity_examples():
    e = private_group_disparity(60, 100, 5.0, 1e-6, FixedUniforms(0.5))
    assert (e.d1_star, e.n1_tilde, e.n2_tilde) == (8.0, 42.0, 58.0)
    e = private_group_disparity(60, 100, 0.5, 1e-6, FixedUniforms(0.5))
    assert (e.d1_star, e.n1_tilde) == (0.0, 50.0)
    e = private_group_disparity(51, 101, 5.0, 1e-6, FixedUniforms(0.5))
    assert (e.d1_star, e.n1_tilde, e.n2_tilde) == (0.5, 50.0, 51.0)


def test_disparity_odd_n_subtracts_half():
    # d1 = 10.5; ceil(10.5 + ln(2e-6)/5) = 8, then minus one half
    e = private_group_disparity(61, 101, 5.0, 1e-6, FixedUniforms(0.5))
    assert e.d1_star == 7.5 and e.n1_tilde == 43.0


def test_disparity_clamped():
    # a huge positive draw would push n1_tilde below 1
    e = private_group_disparity(99, 100, 1.0, 0.4, FixedUniforms(1 - 1e-15))
    assert e.d1_star == 49 and e.n1_tilde == 1


@given(st.integers(2, 400), st.data(), st.floats(0.05, 10), st.floats(1e-8, 0.4), st.floats(1e-6, 1 - 1e-6))
def test_disparity_ranges(n, data, eps_d, delta, u):
    n1 = data.draw(st.integers(1, n - 1))
    e = private_group_disparity(n1, n, eps_d, delta, FixedUniforms(u))
    assert 1 <= e.n1_tilde <= n / 2
    assert e.n1_tilde + e.n2_tilde == n
    assert e.d1_star >= 0
    if n % 2:
        assert e.d1_star % 1 == 0.5


@pytest.mark.parametrize("n,n1", [(100, 60), (101, 51), (500, 400)])
@pytest.mark.parametrize("eps_d", [0.1, 1.0])
def test_disparity_rarely_exceeds_truth(n, n1, eps_d, rng):
    reps, delta = 10_000, 0.05
    d1 = abs(n1 - n / 2)
    over = sum(private_group_disparity(n1, n, eps_d, delta, rng).d1_star > d1 for _ in range(reps))
    assert over / reps <= delta + 3 * math.sqrt(delta * (1 - delta) / reps)


def test_conservative_variance_when_not_exceeding(rng):
    psi = TransformSpec("log1p")
    for _ in range(2000):
        e = private_group_disparity(60, 100, 1.0, 0.05, rng)
        if e.d1_star <= 10:
            assert null_variance(e.n1_tilde, e.n2_tilde, psi, 10) >= null_variance(60, 40, psi, 10)


def test_compose_examples():
    assert compose([(0.4, 0), (0.1, 1e-6)]) == pytest.approx((0.5, 1e-6))
    assert compose([(0.7, 1e-3)]) == (0.7, 1e-3)
    assert compose([(0.8, 0), (0.2, 1e-6)]) == pytest.approx((1.0, 1e-6))
    with pytest.raises(ValueError):
        compose([(0.0, 0.0)])


def test_budget_split():
    b = PrivacyBudget.split(1.0)
    assert (b.eps_u, b.eps_d) == pytest.approx((0.8, 0.2))
    assert b.total == pytest.approx((1.0, 1e-6))
    with pytest.raises(ValueError):
        PrivacyBudget.split(1.0, 1.0)
    with pytest.raises(ValueError):
        PrivacyBudget(1.0, 1.0, 0.0)
