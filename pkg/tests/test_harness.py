import csv
import json
import os

import pytest

from vrrw.harness import OUTPUT_ENV, ExperimentPlan, PlanError, classify_spec, run_experiment
from vrrw.simulator import RunRecord
from vrrw.weights import WeightSpec

PLAN = """
seed = 11
output = "unused"

[[spec]]
id = "lin"
family = "linear"
[spec.simulation]
horizon = 20000
replicas = 3
tail_horizons = [2000]
track = [0]

[[spec]]
id = "p2"
family = "power"
rho = 2.0
[spec.simulation]
horizon = 5000
replicas = 2
"""


def _plan(tmp_path, text=PLAN):
    p = tmp_path / "plan.toml"
    p.write_text(text)
    return ExperimentPlan.load(p)


def _tree(root):
    out = {}
    for dirpath, _, files in os.walk(root):
        for f in files:
            path = os.path.join(dirpath, f)
            with open(path) as fh:
                out[os.path.relpath(path, root)] = fh.read()
    return out


def test_plan_parsing(tmp_path):
    plan = _plan(tmp_path)
    assert [s.id for s in plan.specs] == ["lin", "p2"]
    assert plan.specs[1].weight == WeightSpec.power(2.0)
    assert plan.specs[0].simulation.schedule() == [1800, 2000, 18000, 20000]


def test_fingerprint_ignores_key_order_and_output(tmp_path):
    a = ExperimentPlan.from_dict({"seed": 1, "output": "x", "spec": [{"family": "power", "rho": 2.0, "id": "a"}]})
    b = ExperimentPlan.from_dict({"spec": [{"id": "a", "rho": 2.0, "family": "power"}], "seed": 1, "output": "y"})
    c = ExperimentPlan.from_dict({"seed": 2, "spec": [{"id": "a", "rho": 2.0, "family": "power"}]})
    assert a.fingerprint == b.fingerprint != c.fingerprint


def test_plan_errors():
    with pytest.raises(PlanError):
        ExperimentPlan.from_dict({"spec": [{"family": "linear"}]})
    with pytest.raises(PlanError):
        ExperimentPlan.from_dict({"seed": 1})
    with pytest.raises(PlanError):
        ExperimentPlan.from_dict({"seed": 1, "spec": [{"family": "linear", "id": "a"},
                                                      {"family": "linear", "id": "a"}]})


def test_run_is_deterministic_across_worker_counts(tmp_path):
    plan = _plan(tmp_path)
    one = run_experiment(plan, workers=1, output=str(tmp_path / "one"))
    two = run_experiment(plan, workers=2, output=str(tmp_path / "two"))
    assert _tree(one) == _tree(two)
    recs = RunRecord.read(os.path.join(one, "records", "lin.jsonl"))
    assert [r.header["replica"] for r in recs] == [0, 1, 2]
    assert all(r.header["fingerprint"] == plan.fingerprint for r in recs)
    with open(os.path.join(one, "summary", "localization.csv")) as fh:
        rows = list(csv.DictReader(fh))
    assert {r["horizon"] for r in rows if r["spec_id"] == "lin"} == {"2000", "20000"}


def test_failing_replicas_are_isolated(tmp_path):
    text = PLAN + """
[[spec]]
id = "broken"
family = "linear"
[spec.simulation]
horizon = 100
replicas = 2
bounds = [3, 5]
"""
    out = run_experiment(_plan(tmp_path, text), output=str(tmp_path / "o"))
    with open(os.path.join(out, "summary", "replicas.csv")) as fh:
        rows = list(csv.DictReader(fh))
    broken = [r for r in rows if r["spec_id"] == "broken"]
    assert len(broken) == 2 and all(r["status"].startswith("failed") for r in broken)
    assert all(r["status"] == "ok" for r in rows if r["spec_id"] != "broken")
    assert len(RunRecord.read(os.path.join(out, "records", "lin.jsonl"))) == 3


def test_output_env_override(tmp_path, monkeypatch):
    monkeypatch.setenv(OUTPUT_ENV, str(tmp_path / "env"))
    plan = ExperimentPlan.from_dict({"seed": 1, "spec": [{"family": "linear", "simulation": {"horizon": 100}}]})
    assert run_experiment(plan) == str(tmp_path / "env")
    assert os.path.exists(tmp_path / "env" / "plan.json")


def test_classifier_report():
    rep = classify_spec(WeightSpec.constant(1.0), {"parameters": ["BetaC"], "beta_grid": [0.0, 1.0]})
    assert rep["estimates"]["BetaC"]["verdict"] == "PlusInfinity"
    assert rep["series"]["recip"]["verdict"] == "Divergent"
    json.dumps(rep)
