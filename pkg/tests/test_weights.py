import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from vrrw.weights import (DomainError, OutOfDomainError, PrefixTable, WeightError, WeightSpec,
                          W_limit, eval_H, eval_W, eval_w, inv_H, inv_W, load_tabulated,
                          partial_sums, series_tests)

LINEAR = WeightSpec.linear()
POWER2 = WeightSpec.power(2)

FAMILIES = [
    WeightSpec.constant(1.0), WeightSpec.constant(2.5), LINEAR, POWER2, WeightSpec.power(0.4),
    WeightSpec.sublog(0.3), WeightSpec.sublog(0.7), WeightSpec.superlog(1.0),
    WeightSpec.tabulated([1, 2, 2, 3, 5, 8], "power", 1.0), LINEAR.scaled(3.0),
]
family = st.sampled_from(FAMILIES)


def test_closed_forms():
    assert LINEAR.w(0) == 1.0 and LINEAR.w(9) == 10.0
    assert POWER2.w(3) == 16.0
    assert WeightSpec.constant(2.0).w(100) == 2.0
    assert WeightSpec.sublog(0.5).w(0) == pytest.approx(math.exp(-math.log(2) ** 0.5))
    assert WeightSpec.superlog(2.0).w(1) == pytest.approx(2 * math.log(3) ** 2)
    assert LINEAR.scaled(2.0).w(4) == 10.0


def test_W_examples():
    assert eval_W(LINEAR, 3) == pytest.approx(11 / 6, rel=1e-15)
    assert eval_W(POWER2, 3) == pytest.approx(49 / 36, rel=1e-15)
    assert eval_W(LINEAR, 2.5) == pytest.approx(1 + 1 / 2 + 0.5 / 3, rel=1e-15)
    assert eval_W(WeightSpec.constant(1.0), 7.25) == 7.25
    assert inv_W(LINEAR, 11 / 6) == pytest.approx(3.0, rel=1e-14)


def test_W_limit():
    assert W_limit(LINEAR) == math.inf
    assert W_limit(POWER2) == pytest.approx(math.pi ** 2 / 6, rel=1e-9)
    assert inv_W(POWER2, 2.0) == math.inf
    assert inv_W(LINEAR, -0.5) == 0.0


def test_domain_errors():
    with pytest.raises(DomainError):
        LINEAR.w(-1)
    with pytest.raises(WeightError):
        WeightSpec("cubic", 1.0)
    with pytest.raises(WeightError):
        WeightSpec.constant(0.0)
    with pytest.raises(WeightError):
        WeightSpec.tabulated([1.0, -2.0])
    closed = WeightSpec.tabulated([1.0, 2.0, 3.0])
    with pytest.raises(OutOfDomainError):
        closed.w(5)
    with pytest.raises(OutOfDomainError):
        eval_W(closed, 10.0)


def test_tabulated_file(tmp_path):
    p = tmp_path / "w.txt"
    p.write_text("# tail: power 1.0\n0 1\n1 2\n2 3\n")
    spec = load_tabulated(p)
    assert spec.tail_rule == "power" and spec.table == (1.0, 2.0, 3.0)
    assert spec.w(5) == pytest.approx(3.0 * 6 / 3)
    gap = tmp_path / "bad.txt"
    gap.write_text("0 1\n2 3\n")
    with pytest.raises(WeightError):
        load_tabulated(gap)
    assert WeightSpec.from_dict({"path": str(p), "scale": 2.0}).scale == 2.0


def test_spec_dict_roundtrip():
    for spec in FAMILIES:
        assert WeightSpec.from_dict(spec.to_dict()) == spec
    assert WeightSpec.from_dict({"family": "power", "rho": 2}) == POWER2


def test_check_monotone():
    assert LINEAR.check_monotone(1000)
    with pytest.warns(UserWarning):
        assert not WeightSpec.tabulated([3.0, 1.0, 2.0], "constant").check_monotone(10)


def test_prefix_table_growth_and_freeze():
    tab = PrefixTable(LINEAR, cap=4096)
    assert tab.grow(100) >= 100
    tab.grow(10**9)
    assert tab.size == 4096 and tab.full
    exact = float(np.sum(1.0 / np.arange(1, 4097)))
    assert tab.s1_hi[-1] + tab.s1_lo[-1] == pytest.approx(exact, rel=1e-15)


def test_partial_sums_and_series():
    ps = partial_sums(LINEAR, [10], power=2)
    assert ps[0] == pytest.approx(sum(1 / k ** 2 for k in range(1, 11)), rel=1e-14)
    s = series_tests(POWER2)
    assert s["recip"].verdict.value == "Finite" and s["recip_sq"].verdict.value == "Finite"
    s = series_tests(LINEAR)
    assert s["recip"].verdict.value == "Divergent" and s["recip_sq"].verdict.value == "Finite"


def test_H_examples():
    C = WeightSpec.constant(1.0)
    assert eval_H(C, 0.0) == 1.0
    assert eval_H(C, 2.0) == 5.0
    assert inv_H(C, 5.0) == pytest.approx(2.0, rel=1e-12)
    assert eval_H(POWER2, 5.0) == math.inf


@given(family, st.floats(0.0, 1.0))
def test_W_roundtrip(spec, frac):
    lim = W_limit(spec)
    top = lim if math.isfinite(lim) else eval_W(spec, 1e6)
    u = frac * top * (1 - 1e-9)
    assert abs(eval_W(spec, inv_W(spec, u)) - u) <= 1e-12 * max(1.0, u)


@given(family, st.floats(0.0, 1e5), st.floats(0.0, 1e5))
def test_W_monotone(spec, a, b):
    lo, hi = sorted((a, b))
    assert eval_W(spec, lo) <= eval_W(spec, hi)


@given(family, st.integers(0, 10**5))
def test_W_integer_steps(spec, n):
    assert eval_W(spec, n + 1) - eval_W(spec, n) == pytest.approx(1 / spec.w(n), rel=1e-9, abs=1e-15)


@given(family, st.floats(0.0, 1e4))
def test_H_bounds(spec, x):
    h = eval_H(spec, x)
    assert h >= 2 * x and h >= x
    if x >= eval_H(spec, 0.0):
        assert inv_H(spec, x) <= x


@given(st.sampled_from([LINEAR, WeightSpec.constant(1.0), WeightSpec.power(0.4), WeightSpec.sublog(0.5)]),
       st.floats(0.0, 1e3))
def test_H_inverse(spec, x):
    y = eval_H(spec, x)
    assert inv_H(spec, y) == pytest.approx(x, rel=1e-9, abs=1e-9)


@given(family, st.floats(0.5, 4.0), st.floats(0.0, 1e4))
def test_W_scaling(spec, lam, t):
    assert eval_W(spec.scaled(lam), t) == pytest.approx(eval_W(spec, t) / lam, rel=1e-12, abs=1e-300)


def test_eval_w_vectorized():
    n = np.arange(5)
    assert np.array_equal(eval_w(LINEAR, n), n + 1.0)
