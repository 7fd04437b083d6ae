import numpy as np
import pytest
from hypothesis import given, strategies as st

from vrrw.diagnostics import eqW_residual, interior_sites
from vrrw.rng import split
from vrrw.simulator import (ConfigError, InfeasibleConfigError, InitialConfig, RunRecord,
                            build_CNEtaBeta, check_CNEtaBeta, new_walk, run, step, tail_schedule)
from vrrw.weights import ResourceLimitError, WeightSpec, eval_W

LINEAR = WeightSpec.linear()
POWER2 = WeightSpec.power(2)
specs = st.sampled_from([LINEAR, POWER2, WeightSpec.constant(1.0), WeightSpec.power(0.4),
                         WeightSpec.sublog(0.5)])


def test_first_step_probabilities():
    # from C0 both neighbours have weight w(0): a fair first step, decided by u < 1/2
    u = split(5, 0).random(1)[0]
    st_ = step(new_walk(InitialConfig.C0(), LINEAR, seed=5))
    assert st_.position == (1 if u < 0.5 else -1)
    assert st_.n == 1 and st_.local_time(st_.position) == 1 and st_.local_time(0) == 1


def test_empirical_jump_probability():
    # z0(1) = 3 vs z0(-1) = 0 under linear weights: P(right) = 4/5
    cfg = InitialConfig.custom({0: 1, 1: 3}, start=0)
    rights = sum(step(new_walk(cfg, LINEAR, seed=11, replica=r)).position == 1 for r in range(4000))
    assert abs(rights / 4000 - 0.8) < 4 * np.sqrt(0.16 / 4000)


@given(specs, st.integers(0, 2**31), st.integers(1, 3000))
def test_local_time_accounting(spec, seed, n):
    st_ = new_walk(InitialConfig.C0(), spec, seed=seed)
    st_.advance_to(n)
    rec = run(new_walk(InitialConfig.C0(), spec, seed=seed), n)
    assert sum(rec.checkpoints[-1]["dz"]["values"]) == n
    assert rec.final["position"] == st_.position
    assert rec.final["max_crossing_gap"] <= 1


@given(specs, st.integers(0, 2**31), st.integers(10, 5000))
def test_identity_holds(spec, seed, n):
    rec = run(new_walk(InitialConfig.C0(), spec, seed=seed, track="all"), n, [n // 3, n // 2])
    for x in interior_sites(rec):
        assert eqW_residual(rec, x).summary["max"] <= 1e-10


@given(st.integers(0, 2**31), st.integers(0, 5))
def test_determinism(seed, replica):
    a = run(new_walk(InitialConfig.C0(), LINEAR, seed=seed, replica=replica, track=[0]), 2000, [100]).to_jsonl()
    b = run(new_walk(InitialConfig.C0(), LINEAR, seed=seed, replica=replica, track=[0]), 2000, [100]).to_jsonl()
    assert a == b


def test_replica_streams_differ():
    def field(seed, replica):
        return str(run(new_walk(InitialConfig.C0(), LINEAR, seed=seed, replica=replica), 5000).checkpoints[-1]["dz"])

    assert len({field(1, 0), field(1, 1), field(2, 0)}) == 3


@given(st.integers(0, 2**31))
def test_bounds_respected(seed):
    st_ = new_walk(InitialConfig.C0(), LINEAR, bounds=(-3, 0), seed=seed)
    seen = set()
    for _ in range(300):
        seen.add(step(st_).position)
    assert seen <= {-3, -2, -1, 0}
    assert st_.local_time(1) == 0 and st_.local_time(-4) == 0


def test_forced_moves_at_bounds():
    st_ = new_walk(InitialConfig.custom({0: 1, 1: 1000}), LINEAR, bounds=(-2, 0), seed=0)
    assert step(st_).position == -1


def test_config_validation():
    with pytest.raises(ConfigError):
        InitialConfig.custom({0: -1})
    with pytest.raises(ConfigError):
        new_walk(InitialConfig.C0(), LINEAR, bounds=(1, 3))
    with pytest.raises(ConfigError):
        InitialConfig.from_dict("C7")
    with pytest.raises(TypeError):
        new_walk(InitialConfig.C0(), "linear")
    assert InitialConfig.from_dict(InitialConfig.C0().to_dict()) == InitialConfig.C0()


def test_CNEtaBeta_construction():
    cfg = build_CNEtaBeta(LINEAR, 50, 0.5, 0.3)
    assert check_CNEtaBeta(LINEAR, cfg, 50, 0.5, 0.3) == []
    z = cfg.mapping
    assert z[0] == z[-1] == 50
    assert eval_W(LINEAR, z[-2]) <= eval_W(LINEAR, 50) - 0.5 < eval_W(LINEAR, z[-2] + 1)
    with pytest.raises(InfeasibleConfigError) as exc:
        build_CNEtaBeta(LINEAR, 2, 0.5, 10.0)
    assert "beta" in exc.value.constraint
    with pytest.raises(ConfigError):
        build_CNEtaBeta(LINEAR, 5, 1.5, 0.0)


def test_record_roundtrip(tmp_path):
    rec = run(new_walk(InitialConfig.C0(), POWER2, seed=3, track=[0, 1]), 1000, tail_schedule([1000]))
    path = tmp_path / "r.jsonl"
    rec.write(path)
    back = RunRecord.read(path)
    assert len(back) == 1 and back[0].to_jsonl() == rec.to_jsonl()
    assert back[0].spec == POWER2 and back[0].ns == [900, 1000]


def test_unsorted_schedule_rejected():
    with pytest.raises(ValueError):
        run(new_walk(InitialConfig.C0(), LINEAR), 100, [50, 10])


def test_truncation_flag():
    st_ = new_walk(InitialConfig.C0(), WeightSpec.constant(1.0), seed=0, max_sites=256)
    rec = run(st_, 10**6)
    assert rec.final["truncated"] is True and rec.final["n"] < 10**6


def test_tail_schedule():
    assert tail_schedule([100, 1000], [0.1]) == [90, 100, 900, 1000]
    assert tail_schedule([100], [0.1, 0.5], extra=[0]) == [0, 50, 90, 100]


def test_tracker_names():
    st_ = new_walk(InitialConfig.C0(), LINEAR, seed=1, track=[0])
    st_.advance_to(1000)
    t = {k: st_.tracker(k)[0] for k in ("Y_plus", "Y_minus", "M", "h", "N_right", "N_left")}
    assert t["M"] == pytest.approx(t["Y_plus"] - t["Y_minus"])
    assert t["N_right"] + t["N_left"] >= 1


@given(st.integers(0, 2**31), st.integers(1, 400))
def test_stepwise_equals_batched(seed, n):
    a = new_walk(InitialConfig.C0(), LINEAR, seed=seed, track=[0])
    for _ in range(n):
        step(a)
    b = new_walk(InitialConfig.C0(), LINEAR, seed=seed, track=[0])
    b.advance_to(n)
    assert a.snapshot() == b.snapshot()
