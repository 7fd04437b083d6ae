import json

import pytest

from vrrw.cli import main, parse_spec
from vrrw.simulator import RunRecord
from vrrw.weights import WeightSpec


def test_parse_spec(tmp_path):
    assert parse_spec("linear") == WeightSpec.linear()
    assert parse_spec("power:2") == WeightSpec.power(2)
    assert parse_spec("sublog:0.3*2") == WeightSpec.sublog(0.3).scaled(2)
    assert parse_spec('{"family": "constant", "c": 3}') == WeightSpec.constant(3)
    p = tmp_path / "w.txt"
    p.write_text("# tail: constant\n0 1\n1 2\n")
    assert parse_spec(f"tabulated:{p}").table == (1.0, 2.0)


def test_simulate_and_report(tmp_path, capsys):
    out = tmp_path / "r.jsonl"
    assert main(["simulate", "power:2", "--horizon", "5000", "--replicas", "3", "--seed", "4",
                 "--tail-horizons", "1000", "-o", str(out)]) == 0
    assert len(RunRecord.read(out)) == 3
    assert main(["report", str(out), "--horizons", "1000,5000"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0].startswith("phi,horizon") and len(lines) >= 3


def test_classify(tmp_path):
    out = tmp_path / "c.json"
    assert main(["classify", "constant:1", "--parameter", "BetaC", "-o", str(out)]) == 0
    assert json.loads(out.read_text())["estimates"]["BetaC"]["verdict"] == "PlusInfinity"


def test_experiment(tmp_path, capsys):
    plan = tmp_path / "p.toml"
    plan.write_text('seed = 3\n[[spec]]\nid = "a"\nfamily = "linear"\n[spec.simulation]\nhorizon = 1000\n')
    assert main(["experiment", str(plan), "-o", str(tmp_path / "o")]) == 0
    assert "fingerprint" in capsys.readouterr().out


def test_verify_exit_code(tmp_path):
    assert main(["verify", "--only", "3", "-o", str(tmp_path / "acc")]) == 0
    assert (tmp_path / "acc" / "acceptance.json").exists()


def test_unknown_command():
    with pytest.raises(SystemExit):
        main(["nope"])
