import numpy as np
import pytest

from vrrw.criticals import integrate
from vrrw.oracles import RiemannOracle, family_oracle
from vrrw.weights import WeightSpec


def test_oracle_constant_weight():
    o = RiemannOracle(lambda n: np.ones(n.shape), size=2**12)
    for kind, p in (("I", 1.0), ("J", 0.0), ("J_tilde", 0.0)):
        assert o.integrate(kind, p, 10.0) == pytest.approx(10.0, rel=1e-12)


def test_oracle_manual_value():
    o = RiemannOracle(lambda n: n + 1.0, size=2**12)
    assert o.integrate("J", 0.0, 1.0) == pytest.approx(101 / 144, rel=1e-10)


@pytest.mark.parametrize("spec", [WeightSpec.linear(), WeightSpec.power(0.5), WeightSpec.sublog(0.5)])
def test_breakpoint_matches_oracle(spec):
    o = family_oracle(spec)
    for kind, p in (("I", 0.5), ("J", 0.0), ("J", 1.5), ("J_tilde", 0.0)):
        ref = o.integrate(kind, p, 50.0)
        val = float(integrate(spec, kind, p, [50.0]).values[0])
        assert val == pytest.approx(ref, rel=1e-9)
