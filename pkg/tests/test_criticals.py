import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from vrrw.criticals import (CriticalEstimate, Parameter, TailClassification, Verdict, _combine,
                            check_scaling, check_sublinear_conditions, classify_integral,
                            classify_tail, consistency_gate, estimate_critical, integrand,
                            integrate, partial_I, partial_J, partial_J_tilde)
from vrrw.weights import WeightSpec, series_tests

LINEAR = WeightSpec.linear()
POWER2 = WeightSpec.power(2)
CONST = WeightSpec.constant(1.0)
specs = st.sampled_from([LINEAR, POWER2, CONST, WeightSpec.power(0.5), WeightSpec.sublog(0.3)])


def test_manual_breakpoint_value():
    # W(x) = x on [0,1], so u = 2x crosses 1 (w jumps 1 -> 2) at x = 1/2 and 3/2 (w -> 3)
    # past x = 3/4: 1/2 + 1/2 * 1/4 ... computed by hand: 101/144
    assert partial_J(LINEAR, 0.0, 1.0) == pytest.approx(101 / 144, rel=1e-12)


def test_constant_weight_partials():
    for T in (1.0, 10.0, 25.5):
        assert partial_J(CONST, 0.0, T) == pytest.approx(T, rel=1e-14)
        assert partial_I(CONST, 1.0, T) == pytest.approx(T, rel=1e-14)
        assert partial_J_tilde(CONST, 0.0, T) == pytest.approx(T, rel=1e-14)


def test_integrate_is_cumulative():
    res = integrate(LINEAR, "J", 0.0, [10.0, 100.0, 1000.0])
    assert np.all(np.diff(res.values) > 0)
    assert res.values[1] == pytest.approx(partial_J(LINEAR, 0.0, 100.0), rel=1e-14)
    assert all(res.exact)


def test_integrand_monotone():
    x = np.linspace(0, 50, 2001)
    for kind, p in (("I", 1.0), ("J", 0.0), ("J", -1.0), ("J_tilde", 0.0)):
        f = integrand(LINEAR, kind, p, x)
        assert np.all(np.diff(f) <= 1e-15)


@given(specs, st.sampled_from([0.5, 2.0, 3.0]), st.floats(-2.0, 2.0), st.sampled_from([10.0, 1e3]))
def test_scaling_identity(spec, lam, beta, T):
    val = partial_J(spec.scaled(lam), beta, T)
    assert check_scaling(spec, lam, beta, T) <= 1e-9 * max(1.0, val)


@given(specs, st.floats(-3.0, 3.0), st.floats(1.0, 1e3))
def test_domination(spec, beta, T):
    assert partial_J_tilde(spec, beta, T) >= partial_J(spec, beta, T) - 1e-12


@given(specs, st.floats(-2.0, 2.0), st.floats(0.0, 1.0), st.floats(1.0, 500.0))
def test_J_monotone_in_beta(spec, beta, d, T):
    assert partial_J(spec, beta + d, T) <= partial_J(spec, beta, T) + 1e-12


def _synthetic(s):
    t = 10.0 ** np.arange(2, 10)
    if s == 1:
        p = np.log(t)
    else:
        p = (1 - t ** (1 - s)) / (s - 1)
    return t, p, t ** -s


def test_classify_tail_synthetic():
    assert classify_tail(*_synthetic(2.0)).verdict is Verdict.FINITE
    assert classify_tail(*_synthetic(0.5)).verdict is Verdict.DIVERGENT
    assert classify_tail(*_synthetic(1.0)).verdict is Verdict.DIVERGENT
    assert classify_tail(*_synthetic(1.05)).verdict is Verdict.INCONCLUSIVE
    t, p, f = _synthetic(2.0)
    short = classify_tail(t[:3], p[:3], f[:3])
    assert short.verdict is Verdict.INCONCLUSIVE and "admissible" in short.note


def test_classify_integral_regimes():
    assert classify_integral(CONST, "J", 0.0).verdict is Verdict.DIVERGENT
    assert classify_integral(LINEAR, "J", 0.0).verdict is Verdict.FINITE


def _probe(verdict):
    return TailClassification(verdict, [], (math.nan,) * 3)


def test_combine_rules():
    F, D, X = Verdict.FINITE, Verdict.DIVERGENT, Verdict.INCONCLUSIVE
    est = _combine(Parameter.BETA_C, [(v, _probe(c)) for v, c in [(-1.0, D), (0.0, D), (1.0, F), (2.0, F)]])
    assert est.verdict == "FiniteBracket" and est.bracket == (0.0, 1.0)
    est = _combine(Parameter.BETA_C, [(v, _probe(c)) for v, c in [(-1.0, F), (0.0, F)]])
    assert est.verdict == "MinusInfinity"
    est = _combine(Parameter.BETA_C, [(v, _probe(c)) for v, c in [(-1.0, D), (0.0, X)]])
    assert est.verdict == "PlusInfinity"
    est = _combine(Parameter.BETA_C, [(v, _probe(X)) for v in (0.0, 1.0)])
    assert est.verdict == "Unknown" and est.rank is None
    est = _combine(Parameter.ALPHA_C, [(v, _probe(F)) for v in (0.5, 1.0)])
    assert est.verdict == "FiniteBracket" and est.bracket == (0.0, 0.5)
    est = _combine(Parameter.BETA_C, [(v, _probe(c)) for v, c in [(-1.0, D), (0.0, F), (1.0, D), (2.0, F)]])
    assert any("monotonicity" in n for n in est.notes)


def test_consistency_gate_flags():
    series = series_tests(WeightSpec.constant(1.0))
    lo = CriticalEstimate(Parameter.BETA_C, "MinusInfinity", None, [])
    hi = CriticalEstimate(Parameter.BETA_TILDE_C, "PlusInfinity", None, [])
    problems = consistency_gate(lo, hi, series)
    assert len(problems) == 1 and "1/w^2" in problems[0]
    problems = consistency_gate(hi, lo, series_tests(LINEAR))
    assert len(problems) == 1 and "below" in problems[0]


def test_power2_beta_bracket_contains_minus_W_limit():
    est = estimate_critical(POWER2, Parameter.BETA_C)
    assert est.verdict == "FiniteBracket"
    lo, hi = est.bracket
    assert lo < -math.pi ** 2 / 6 < hi


def test_sublinear_conditions():
    assert check_sublinear_conditions(LINEAR)["cond_13"].verdict == "bounded"
    assert check_sublinear_conditions(WeightSpec.power(0.5))["cond_14"].verdict == "bounded"
    assert all(c.verdict == "bounded" for c in check_sublinear_conditions(CONST).values())


def test_estimate_serializes():
    est = estimate_critical(CONST, "BetaC", grid=[0.0, 1.0])
    d = est.to_dict()
    assert d["verdict"] == "PlusInfinity" and len(d["probes"]) == 2
