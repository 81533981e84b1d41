import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rpst.errors import DegenerateVariance, QTooLarge
from rpst.oracle import enumerate_srswor, exact_u1_null
from rpst.ranks import ModificationSpec, rank_data, signed_rank_data
from rpst.stats import (
    null_variance,
    pi_n_diagnostic,
    sensitivity_bound,
    srswor_moments,
    u1_statistic,
    w1_null_variance,
    w1_sensitivity,
    w1_statistic,
)
from rpst.transforms import TransformSpec, standard_transforms, retained_values

ID = TransformSpec("identity")
PSIS = standard_transforms()


def small_sample():
    return rank_data([-2.0, 2.0], [-0.1, 0.1], ModificationSpec(Q=0))


def test_u1_example():
    v = u1_statistic(small_sample(), ID)
    assert (v.raw_sum, v.mu1, v.u1) == (7.0, 5.0, 2.0)


def test_u1_whole_sample_is_zero():
    # one group holding all points: build the flags directly
    s = small_sample()
    whole = type(s)(s.values, np.ones(4, bool), s.ranks, 4, 0, 0)
    assert u1_statistic(whole, ID).u1 == 0


def test_u1_label_swap():
    assert u1_statistic(small_sample().swapped(), ID).u1 == -2.0


@given(st.lists(st.floats(-1e3, 1e3, allow_nan=False), min_size=2, max_size=30, unique=True), st.data())
def test_u1_antisymmetry(values, data):
    n1 = data.draw(st.integers(1, len(values) - 1))
    Q = data.draw(st.integers(0, len(values)))
    psi = data.draw(st.sampled_from(PSIS))
    s = rank_data(values[:n1], values[n1:], ModificationSpec(Q=Q))
    assert u1_statistic(s, psi).u1 == pytest.approx(-u1_statistic(s.swapped(), psi).u1, abs=1e-9)


@given(st.integers(2, 12), st.data(), st.floats(-50, 50))
def test_u1_shift_robust(n, data, b):
    """Centering psi + b by its own exact subset mean gives back U1."""
    n1 = data.draw(st.integers(1, n - 1))
    Q = data.draw(st.integers(0, n))
    psi = data.draw(st.sampled_from(PSIS))
    perm = data.draw(st.permutations(range(n)))
    values = np.array(perm, dtype=float)
    s = rank_data(values[:n1], values[n1:], ModificationSpec(Q=Q))
    shifted = psi(s.ranks) + b  # zeros become b as well
    centered = shifted[s.group_flags].sum() - n1 / n * shifted.sum()
    assert centered == pytest.approx(u1_statistic(s, psi).u1, abs=1e-9)


def test_null_variance_examples():
    assert null_variance(2, 2, ID, 0) == pytest.approx(5 / 3, rel=1e-15)
    assert null_variance(1, 3, ID, 0) == pytest.approx(1.25, rel=1e-15)
    for psi in PSIS:
        assert null_variance(3, 4, psi, 7) == 0


def test_null_variance_against_subset_enumeration():
    # independent of the oracle module: brute force over subsets of {1, 2, 3, 4}
    sums = [3, 4, 5, 5, 6, 7]
    mean = Fraction(sum(sums), 6)
    var = sum((Fraction(s) - mean) ** 2 for s in sums) / 6
    assert var == Fraction(5, 3)


@settings(max_examples=60)
@given(st.integers(2, 9), st.data())
def test_null_variance_matches_oracle(n, data):
    n1 = data.draw(st.integers(1, n - 1))
    Q = data.draw(st.integers(0, n - 2))
    psi = data.draw(st.sampled_from(PSIS))
    dist = exact_u1_null(n, n1, Q, psi)
    assert null_variance(n1, n - n1, psi, Q) == pytest.approx(dist.variance(), rel=1e-9)


def test_null_variance_symmetric_in_groups():
    for psi in PSIS:
        assert null_variance(30, 70, psi, 10) == pytest.approx(null_variance(70, 30, psi, 10), rel=1e-12)


def test_null_variance_large_n_is_finite():
    v = null_variance(500_000, 500_000, TransformSpec("square"), 0)
    assert math.isfinite(v) and v > 0


def test_sensitivity_examples():
    assert sensitivity_bound(ID, 4, 0).gs_star == 4.5
    assert sensitivity_bound(ID, 15, 3).gs_star == pytest.approx(17.8, rel=1e-14)


def test_sensitivity_first_branch_dominates():
    psi = TransformSpec("arctan")
    hits = 0
    for n in range(2, 40):
        for Q in range(0, n - 1):
            b = sensitivity_bound(psi, n, Q)
            if b.second <= b.psi_bar:
                hits += 1
                assert b.gs_star == b.top
            assert b.gs_star >= b.top > 0
    assert hits > 0


def test_sensitivity_q_too_large():
    with pytest.raises(QTooLarge):
        sensitivity_bound(ID, 5, 4)


def _signed():
    return signed_rank_data(np.column_stack([np.zeros(3), [0.5, -1.2, 2.0]]), ModificationSpec(Q=0))


def test_w1_examples():
    assert w1_statistic(_signed(), ID) == 2
    s1 = signed_rank_data(np.column_stack([np.zeros(3), [0.5, -1.2, 2.0]]), ModificationSpec(Q=1))
    assert w1_statistic(s1, ID) == 1
    s3 = signed_rank_data(np.column_stack([np.zeros(3), [0.5, -1.2, 2.0]]), ModificationSpec(Q=3))
    assert w1_statistic(s3, ID) == 0


def test_w1_sensitivity_examples():
    assert w1_sensitivity(ID, 10, 0) == 20
    assert w1_sensitivity(ID, 10, 4) == 12
    assert w1_sensitivity(TransformSpec("square"), 5, 1) == 32
    with pytest.raises(QTooLarge):
        w1_sensitivity(ID, 3, 3)


def test_w1_null_variance_examples():
    assert w1_null_variance(ID, 3, 0) == 14
    assert w1_null_variance(ID, 3, 3) == 0
    assert w1_null_variance(TransformSpec.parse("sqrt"), 4, 0) == pytest.approx(10, rel=1e-15)


def test_srswor_examples():
    m, v = srswor_moments([1, 2, 3, 4], 2)
    assert m == 5 and v == pytest.approx(5 / 3, rel=1e-15)
    m, v = srswor_moments([1.5, 2, 7], 3)
    assert m == 10.5 and v == pytest.approx(0, abs=1e-12)
    assert srswor_moments([1, 2, 3, 4], 1)[1] == pytest.approx(1.25)
    assert srswor_moments([1, 2, 3, 4], 3)[1] == pytest.approx(1.25)


def test_srswor_bad_k():
    with pytest.raises(ValueError):
        srswor_moments([1, 2], 3)


nonneg = st.lists(st.integers(0, 20).map(float), min_size=1, max_size=9)


@given(nonneg, st.data())
def test_srswor_matches_enumeration(values, data):
    k = data.draw(st.integers(0, len(values)))
    m, v = srswor_moments(values, k)
    m_ref, v_ref = enumerate_srswor(values, k)
    assert m == pytest.approx(m_ref, rel=1e-9, abs=1e-9)
    assert v == pytest.approx(v_ref, rel=1e-9, abs=1e-9)


@given(nonneg)
def test_srswor_symmetry_and_monotonicity(values):
    n = len(values)
    var = [srswor_moments(values, k)[1] for k in range(n + 1)]
    for k in range(n + 1):
        assert var[k] == pytest.approx(var[n - k], rel=1e-9, abs=1e-9)
    if len(set(values)) > 1:
        # strictly larger as k moves toward n/2
        for k in range(n // 2):
            if abs(k + 1 - n / 2) < abs(k - n / 2):
                assert var[k + 1] > var[k] + 1e-12


def test_pi_n_examples():
    p = pi_n_diagnostic(ID, 2, 2, 0, 1.0)
    assert p == pytest.approx(4.5 / math.sqrt(5 / 3), rel=1e-12)
    assert pi_n_diagnostic(ID, 2, 2, 0, p) == pytest.approx(1.0, rel=1e-12)
    assert pi_n_diagnostic(ID, 30, 20, 5, 2.0) == pytest.approx(pi_n_diagnostic(ID, 30, 20, 5, 1.0) / 2, rel=1e-12)


def test_pi_n_degenerate():
    with pytest.raises(DegenerateVariance):
        # n1 = n leaves nothing random
        pi_n_diagnostic(ID, 4, 0, 0, 1.0)
