"""Experiment plans, replica orchestration and persisted outputs.

A plan is a TOML file::

    seed = 20260101
    output = "runs/demo"          # VRRW_OUTPUT_DIR overrides this
    workers = 4

    [classifier]                  # optional
    parameters = ["BetaC", "BetaTildeC"]
    exponents = [2, 3, 4, 5, 6, 7, 8, 9]
    margin = 0.15

    [[spec]]
    id = "linear"
    family = "linear"             # constant | power | linear | sublog | superlog | tabulated
    # param = 2.0, scale = 1.0, path = "weights.txt" (tabulated)

    [spec.simulation]
    horizon = 1000000
    replicas = 20
    tail_horizons = [100000, 1000000]
    phis = [0.1]
    checkpoints = []              # extra snapshot times
    config = "C0"                 # or { z0 = { "0" = 1 }, start = 0 } or { N = 10, eta = 0.5, beta = 1.0 }
    bounds = [-3, 0]              # optional reflecting segment
    track = [0]                   # optional tracker sites, or "all"

Outputs (all deterministic given the plan):

* ``records/<id>.jsonl``: one run record per replica, in replica order;
* ``classifier/<id>.json``: series tests, critical-parameter estimates, consistency gate;
* ``summary/replicas.csv``, ``summary/localization.csv``, ``summary/comparison.csv``;
* ``plan.json``: the normalized plan and its fingerprint.
"""

import csv
import hashlib
import json
import os
import shutil
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import tomli

from .criticals import Parameter, consistency_gate, estimate_critical
from .diagnostics import localization_report, tail_support
from .simulator import InitialConfig, RunRecord, build_CNEtaBeta, new_walk, run, tail_schedule
from .weights import WeightSpec, series_tests

OUTPUT_ENV = "VRRW_OUTPUT_DIR"


class PlanError(ValueError):
    pass


@dataclass
class SimulationParams:
    horizon: int
    replicas: int = 1
    tail_horizons: list = field(default_factory=list)
    phis: list = field(default_factory=lambda: [0.1])
    checkpoints: list = field(default_factory=list)
    config: object = "C0"
    bounds: list | None = None
    track: object = None

    def schedule(self):
        horizons = sorted(set(int(h) for h in self.tail_horizons) | {self.horizon})
        return tail_schedule(horizons, self.phis, self.checkpoints)


@dataclass
class SpecEntry:
    id: str
    weight: WeightSpec
    simulation: SimulationParams | None


@dataclass
class ExperimentPlan:
    seed: int
    specs: list
    output: str = "vrrw-output"
    workers: int = 1
    classifier: dict | None = None
    raw: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        if "seed" not in d:
            raise PlanError("plan needs a master seed")
        entries = d.get("spec") or []
        if not entries:
            raise PlanError("plan lists no weight specs")
        specs, seen = [], set()
        for e in entries:
            e = dict(e)
            sid = str(e.pop("id", None) or "")
            sim = e.pop("simulation", None)
            weight = WeightSpec.from_dict(e)
            sid = sid or weight.label
            if sid in seen:
                raise PlanError(f"duplicate spec id {sid!r}")
            seen.add(sid)
            params = None
            if sim is not None:
                params = SimulationParams(**sim)
                if params.horizon < 1:
                    raise PlanError(f"{sid}: horizon must be at least 1")
                if params.replicas < 1:
                    raise PlanError(f"{sid}: replicas must be at least 1")
            specs.append(SpecEntry(sid, weight, params))
        return cls(int(d["seed"]), specs, str(d.get("output", "vrrw-output")),
                   int(d.get("workers", 1)), d.get("classifier"), d)

    @classmethod
    def load(cls, path):
        with open(path, "rb") as fh:
            return cls.from_dict(tomli.load(fh))

    @property
    def fingerprint(self):
        """Content hash, insensitive to key order."""
        canon = json.dumps(_canonical(self.raw), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()

    def output_dir(self):
        return os.environ.get(OUTPUT_ENV) or self.output


def _canonical(obj):
    if isinstance(obj, dict):
        return {str(k): _canonical(v) for k, v in obj.items() if k not in ("output", "workers")}
    if isinstance(obj, (list, tuple)):
        return [_canonical(v) for v in obj]
    return obj


def make_config(spec, config):
    if isinstance(config, str):
        return InitialConfig.from_dict(config)
    if isinstance(config, dict) and {"N", "eta", "beta"} <= set(config):
        return build_CNEtaBeta(spec, int(config["N"]), float(config["eta"]), float(config["beta"]))
    return InitialConfig.from_dict(config)


# replicas -------------------------------------------------------------------------------

def run_replica(spec_dict, sim, seed, replica, fingerprint, spec_id):
    """One replica as JSONL text (also the unit of work for the pool)."""
    spec = WeightSpec.from_dict(spec_dict)
    sim = SimulationParams(**sim)
    state = new_walk(make_config(spec, sim.config), spec, bounds=sim.bounds, seed=seed,
                     replica=replica, track=sim.track)
    record = run(state, sim.horizon, sim.schedule(), sim.phis, fingerprint, spec_id)
    return record.to_jsonl()


def _replica_task(args):
    spec_dict, sim, seed, replica, fingerprint, spec_id, part = args
    try:
        text = run_replica(spec_dict, sim, seed, replica, fingerprint, spec_id)
        with open(part, "w") as fh:
            fh.write(text)
        return replica, None
    except Exception as exc:  # isolate the failing replica
        return replica, f"{type(exc).__name__}: {exc}"


def run_experiment(plan, workers=None, output=None, classify=True):
    """Run every replica and classifier of ``plan``; returns the output directory."""
    out = output or plan.output_dir()
    workers = plan.workers if workers is None else workers
    for sub in ("records", "classifier", "summary", "parts"):
        os.makedirs(os.path.join(out, sub), exist_ok=True)
    fp = plan.fingerprint

    tasks = []
    for entry in plan.specs:
        if entry.simulation is None:
            continue
        sim = entry.simulation.__dict__
        for r in range(entry.simulation.replicas):
            part = os.path.join(out, "parts", f"{entry.id}.{r:06d}.jsonl")
            tasks.append((entry.weight.to_dict(), sim, plan.seed, r, fp, entry.id, part))
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_replica_task, tasks))
    else:
        results = [_replica_task(t) for t in tasks]
    failures = {}
    for task, (replica, err) in zip(tasks, results):
        if err is not None:
            failures[(task[5], replica)] = err

    records = {}
    for entry in plan.specs:
        if entry.simulation is None:
            continue
        path = os.path.join(out, "records", f"{entry.id}.jsonl")
        recs = []
        with open(path, "w") as dst:
            for r in range(entry.simulation.replicas):
                part = os.path.join(out, "parts", f"{entry.id}.{r:06d}.jsonl")
                if (entry.id, r) in failures:
                    continue
                with open(part) as src:
                    text = src.read()
                dst.write(text)
                recs.extend(RunRecord.from_lines(text.splitlines()))
        records[entry.id] = recs
    shutil.rmtree(os.path.join(out, "parts"), ignore_errors=True)

    verdicts = {}
    if classify and plan.classifier is not None:
        for entry in plan.specs:
            verdicts[entry.id] = classify_spec(entry.weight, plan.classifier)
            with open(os.path.join(out, "classifier", f"{entry.id}.json"), "w") as fh:
                json.dump(verdicts[entry.id], fh, indent=1, sort_keys=True)

    _write_summaries(out, plan, records, failures, verdicts)
    with open(os.path.join(out, "plan.json"), "w") as fh:
        json.dump({"fingerprint": fp, "plan": _canonical(plan.raw)}, fh, indent=1, sort_keys=True)
    return out


def classify_spec(spec, params=None):
    """JSON-ready classifier report: series tests, estimates and the consistency gate."""
    params = dict(params or {})
    kw = {}
    if "exponents" in params:
        kw["exponents"] = tuple(int(k) for k in params["exponents"])
    if "margin" in params:
        kw["margin"] = float(params["margin"])
    wanted = [Parameter(p) for p in params.get("parameters", ["BetaC", "BetaTildeC"])]
    series = series_tests(spec, margin=kw.get("margin", 0.15))
    estimates = {}
    for p in wanted:
        grid = params.get("alpha_grid" if p is Parameter.ALPHA_C else "beta_grid")
        estimates[p] = estimate_critical(spec, p, grid=grid, **kw)
    gate = []
    if Parameter.BETA_C in estimates and Parameter.BETA_TILDE_C in estimates:
        gate = consistency_gate(estimates[Parameter.BETA_C], estimates[Parameter.BETA_TILDE_C], series)
    return {
        "spec": spec.to_dict(),
        "label": spec.label,
        "series": {k: v.to_dict() for k, v in series.items()},
        "estimates": {p.value: e.to_dict() for p, e in estimates.items()},
        "consistency_violations": gate,
        "heuristic": "numerical classification from finite cutoffs; not a proof",
    }


def _write_summaries(out, plan, records, failures, verdicts):
    with open(os.path.join(out, "summary", "replicas.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["spec_id", "replica", "seed", "status", "horizon", "truncated",
                    "max_crossing_gap", "phi", "tail_horizon", "tail_cardinality", "tail_sites"])
        for entry in plan.specs:
            sim = entry.simulation
            if sim is None:
                continue
            by_replica = {r.header["replica"]: r for r in records.get(entry.id, [])}
            horizons = sorted(set(int(h) for h in sim.tail_horizons) | {sim.horizon})
            for i in range(sim.replicas):
                if (entry.id, i) in failures:
                    w.writerow([entry.id, i, plan.seed, "failed: " + failures[(entry.id, i)],
                                sim.horizon, "", "", "", "", "", ""])
                    continue
                rec = by_replica[i]
                for phi in sim.phis:
                    for h in horizons:
                        try:
                            ts = tail_support(rec, phi, h)
                            card, sites = ts.cardinality, " ".join(map(str, ts.sites))
                        except ValueError:
                            card, sites = "", ""
                        w.writerow([entry.id, i, plan.seed, "ok", sim.horizon,
                                    rec.final.get("truncated"), rec.final.get("max_crossing_gap"),
                                    phi, h, card, sites])

    loc_rows = {}
    with open(os.path.join(out, "summary", "localization.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["spec_id", "phi", "horizon", "cardinality", "count", "records"])
        for entry in plan.specs:
            sim = entry.simulation
            recs = records.get(entry.id, [])
            if sim is None or not recs:
                continue
            horizons = sorted(set(int(h) for h in sim.tail_horizons) | {sim.horizon})
            for phi in sim.phis:
                rows = localization_report(recs, phi, horizons)
                loc_rows[(entry.id, phi)] = rows
                for row in rows:
                    for card, count in row.histogram.items():
                        w.writerow([entry.id, phi, row.horizon, card, count, row.records])

    with open(os.path.join(out, "summary", "comparison.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["spec_id", "label", "recip", "recip_sq", "beta_c", "beta_tilde_c",
                    "consistency", "phi", "horizon", "modal_cardinality", "fraction_five",
                    "records", "failed_replicas"])
        for entry in plan.specs:
            v = verdicts.get(entry.id)
            cols = ["", "", "", "", ""]
            if v is not None:
                est = v["estimates"]
                fmt = lambda e: "" if e is None else (
                    e["verdict"] if e["bracket"] is None else f"{e['verdict']}{tuple(e['bracket'])}")
                cols = [v["series"]["recip"]["verdict"], v["series"]["recip_sq"]["verdict"],
                        fmt(est.get("BetaC")), fmt(est.get("BetaTildeC")),
                        "ok" if not v["consistency_violations"] else "; ".join(v["consistency_violations"])]
            n_failed = sum(1 for (sid, _) in failures if sid == entry.id)
            sim_rows = [(phi, row) for (sid, phi), rows in loc_rows.items() if sid == entry.id for row in rows]
            if not sim_rows:
                w.writerow([entry.id, entry.weight.label, *cols, "", "", "", "", 0, n_failed])
            for phi, row in sim_rows:
                w.writerow([entry.id, entry.weight.label, *cols, phi, row.horizon, row.mode,
                            f"{row.fraction_five:.6g}", row.records, n_failed])


def verify_suite(only=None, workers=1, output=None, report=print):
    """Run the acceptance criteria; returns a list of result dicts."""
    from .acceptance import run_all
    return run_all(only=only, workers=workers, output=output, report=report)


__all__ = ["ExperimentPlan", "SimulationParams", "SpecEntry", "PlanError", "run_experiment",
           "run_replica", "classify_spec", "verify_suite", "make_config"]
