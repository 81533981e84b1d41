import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rpst.errors import InvalidTransform
from rpst.transforms import (
    STANDARD_TRANSFORMS,
    TransformSpec,
    apply,
    condition_ratio,
    standard_transforms,
    power_sums,
    psi_bar_q,
    retained_values,
)

PSIS = standard_transforms()


def test_apply_examples():
    assert apply(TransformSpec("identity"), 7) == 7
    assert apply(TransformSpec("log1p"), 0) == 0
    assert apply(TransformSpec("arctan"), 1) == pytest.approx(math.pi / 4, rel=1e-15)


def test_apply_rejects_negative_rank():
    with pytest.raises(ValueError):
        apply(TransformSpec("identity"), -1)


@pytest.mark.parametrize("name", STANDARD_TRANSFORMS)
def test_zero_maps_to_zero(name):
    assert TransformSpec.parse(name)(0) == 0.0


def test_parse_names():
    assert TransformSpec.parse("sqrt") == TransformSpec("power", 0.5)
    assert TransformSpec.parse("power:3").k == 3.0
    assert TransformSpec.parse("square")(4) == 16
    assert [p.name for p in PSIS] == list(STANDARD_TRANSFORMS)
    assert TransformSpec.parse("power:1.5").name == "power:1.5"


@pytest.mark.parametrize("text", ["cube", "power:", "power:x", "power:0", "power:-1", "power:inf"])
def test_parse_rejects(text):
    with pytest.raises(InvalidTransform):
        TransformSpec.parse(text)


def test_custom_transform_validated():
    with pytest.raises(InvalidTransform, match="psi\\(0\\)"):
        TransformSpec.custom(lambda r: r + 1.0, "shifted")
    with pytest.raises(InvalidTransform):
        TransformSpec.custom(lambda r: -r, "negative")
    with pytest.raises(InvalidTransform):
        TransformSpec.custom(lambda r: np.minimum(r, 5.0), "flat")
    ok = TransformSpec.custom(lambda r: 3.0 * np.arctan(r), "3atan")
    assert ok(1) == pytest.approx(3 * math.pi / 4)


def test_custom_transforms_with_same_label_differ():
    a = TransformSpec.custom(lambda r: r * 1.0, "c")
    b = TransformSpec.custom(lambda r: r * 2.0, "c")
    assert power_sums(a, 4, 0)[0] == 10
    assert power_sums(b, 4, 0)[0] == 20


@pytest.mark.parametrize("psi", PSIS, ids=STANDARD_TRANSFORMS)
def test_strictly_increasing(psi):
    v = psi(np.arange(0, 5000))
    assert np.all(np.diff(v) > 0)


def test_psi_bar_examples():
    ident = TransformSpec("identity")
    assert psi_bar_q(ident, 4, 0) == 2.5
    assert psi_bar_q(ident, 15, 3) == pytest.approx(5.2, rel=1e-15)
    for psi in PSIS:
        assert psi_bar_q(psi, 7, 7) == 0


@given(st.integers(1, 300), st.sampled_from(PSIS))
def test_psi_bar_nonincreasing_in_q(n, psi):
    bars = [psi_bar_q(psi, n, Q) for Q in range(n + 1)]
    assert all(b <= a for a, b in zip(bars, bars[1:]))


def test_retained_values():
    assert retained_values(TransformSpec("identity"), 5, 2).tolist() == [1, 2, 3]
    assert power_sums(TransformSpec("identity"), 3, 0) == (6.0, 14.0)


def test_condition_ratio_examples():
    ident = TransformSpec("identity")
    assert condition_ratio(ident, 3, 0, 4) == pytest.approx(1.5, rel=1e-12)
    assert condition_ratio(ident, 2, 0, 4) == pytest.approx(1.0, rel=1e-12)


def test_condition_ratio_matches_scipy():
    from scipy import stats

    v = retained_values(TransformSpec("square"), 40, 10)
    assert condition_ratio(TransformSpec("square"), 40, 10, 4) == pytest.approx(stats.kurtosis(v, fisher=False), rel=1e-10)
    assert condition_ratio(TransformSpec("square"), 40, 10, 3) == pytest.approx(stats.skew(v), rel=1e-10)


@given(st.integers(2, 200), st.data(), st.floats(1e-3, 1e3), st.integers(3, 8))
def test_condition_ratio_scale_invariant(n, data, c, r):
    Q = data.draw(st.integers(0, n - 2))
    base = TransformSpec("arctan")
    scaled = TransformSpec.custom(lambda x: c * np.arctan(x), f"{c}*arctan")
    assert condition_ratio(scaled, n, Q, r) == pytest.approx(condition_ratio(base, n, Q, r), rel=1e-8, abs=1e-10)


def test_condition_ratio_errors():
    with pytest.raises(ValueError):
        condition_ratio(TransformSpec("identity"), 5, 4, 4)
    with pytest.raises(ValueError):
        condition_ratio(TransformSpec("identity"), 5, 0, 2)
