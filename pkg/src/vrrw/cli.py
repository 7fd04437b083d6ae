"""Command-line entry point: ``vrrw {classify,simulate,experiment,report,verify}``."""

import argparse
import csv
import json
import sys

from .criticals import Parameter
from .diagnostics import localization_report
from .harness import ExperimentPlan, classify_spec, make_config, run_experiment
from .simulator import RunRecord, new_walk, run, tail_schedule
from .weights import WeightSpec


def parse_spec(text):
    """``linear``, ``power:2``, ``sublog:0.3``, ``constant:1``, ``superlog:1``,
    ``tabulated:path`` or a JSON object; an optional ``*scale`` suffix scales it."""
    text = text.strip()
    if text.startswith("{"):
        return WeightSpec.from_dict(json.loads(text))
    scale = 1.0
    if "*" in text:
        text, s = text.rsplit("*", 1)
        scale = float(s)
    name, _, arg = text.partition(":")
    if name == "tabulated":
        return WeightSpec.from_dict({"path": arg, "scale": scale})
    spec = WeightSpec(name, float(arg) if arg else None)
    return spec.scaled(scale) if scale != 1.0 else spec


def _cmd_classify(args):
    spec = parse_spec(args.spec)
    params = {"parameters": args.parameter or ["BetaC", "BetaTildeC"]}
    if args.exponents:
        params["exponents"] = [int(k) for k in args.exponents.split(",")]
    report = classify_spec(spec, params)
    text = json.dumps(report, indent=1, sort_keys=True)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        print(text)
    for p, e in report["estimates"].items():
        bracket = "" if e["bracket"] is None else f" {tuple(e['bracket'])}"
        print(f"{p}: {e['verdict']}{bracket}", file=sys.stderr)
    return 0


def _cmd_simulate(args):
    spec = parse_spec(args.spec)
    config = make_config(spec, json.loads(args.config) if args.config.startswith("{") else args.config)
    bounds = [int(b) for b in args.bounds.split(",")] if args.bounds else None
    track = None
    if args.track == "all":
        track = "all"
    elif args.track:
        track = [int(s) for s in args.track.split(",")]
    horizons = [int(float(h)) for h in args.tail_horizons.split(",")] if args.tail_horizons else []
    phis = [float(p) for p in args.phi.split(",")]
    schedule = tail_schedule(sorted(set(horizons) | {int(float(args.horizon))}), phis)
    out = open(args.output, "w") if args.output else sys.stdout
    try:
        for r in range(args.replica, args.replica + args.replicas):
            st = new_walk(config, spec, bounds=bounds, seed=args.seed, replica=r, track=track)
            out.write(run(st, int(float(args.horizon)), schedule, phis).to_jsonl())
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def _cmd_experiment(args):
    plan = ExperimentPlan.load(args.plan)
    out = run_experiment(plan, workers=args.workers, output=args.output)
    print(f"fingerprint {plan.fingerprint}")
    print(f"outputs in {out}")
    return 0


def _cmd_report(args):
    records = []
    for path in args.records:
        records += RunRecord.read(path)
    horizons = [int(float(h)) for h in args.horizons.split(",")] if args.horizons else None
    rows = localization_report(records, args.phi, horizons)
    w = csv.writer(sys.stdout)
    w.writerow(["phi", "horizon", "records", "mode", "fraction_five", "cardinality", "count"])
    for row in rows:
        for card, count in row.histogram.items():
            w.writerow([args.phi, row.horizon, row.records, row.mode,
                        f"{row.fraction_five:.6g}", card, count])
    return 0


def _cmd_verify(args):
    from .acceptance import run_all
    only = {int(k) for k in args.only.split(",")} if args.only else None
    results = run_all(only=only, workers=args.workers, output=args.output)
    failed = [r.id for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed"
          + (f"; failed: {failed}" if failed else ""))
    return 1 if failed else 0


def build_parser():
    p = argparse.ArgumentParser(prog="vrrw", description="Vertex-reinforced random walk toolkit.")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("classify", help="classify the critical parameters of a weight")
    c.add_argument("spec", help="e.g. linear, power:2, sublog:0.3, tabulated:weights.txt")
    c.add_argument("--parameter", action="append", choices=[q.value for q in Parameter])
    c.add_argument("--exponents", help="cutoff exponents, e.g. 2,3,4,5,6,7,8,9")
    c.add_argument("-o", "--output")
    c.set_defaults(func=_cmd_classify)

    s = sub.add_parser("simulate", help="simulate replicas and write JSONL run records")
    s.add_argument("spec")
    s.add_argument("--horizon", default="1e6")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--replica", type=int, default=0, help="first replica index")
    s.add_argument("--replicas", type=int, default=1)
    s.add_argument("--config", default="C0", help="C0 or a JSON object")
    s.add_argument("--bounds", help="reflecting segment, e.g. -3,0")
    s.add_argument("--track", help="'all' or comma-separated sites")
    s.add_argument("--tail-horizons", help="extra horizons with tail-support checkpoints")
    s.add_argument("--phi", default="0.1")
    s.add_argument("-o", "--output")
    s.set_defaults(func=_cmd_simulate)

    e = sub.add_parser("experiment", help="run a TOML experiment plan")
    e.add_argument("plan")
    e.add_argument("--workers", type=int)
    e.add_argument("-o", "--output")
    e.set_defaults(func=_cmd_experiment)

    r = sub.add_parser("report", help="localization table (CSV) from JSONL records")
    r.add_argument("records", nargs="+")
    r.add_argument("--phi", type=float, default=0.1)
    r.add_argument("--horizons")
    r.set_defaults(func=_cmd_report)

    v = sub.add_parser("verify", help="run the acceptance suite; exit 0 iff every criterion passes")
    v.add_argument("--only", help="comma-separated criterion numbers")
    v.add_argument("--workers", type=int, default=1)
    v.add_argument("-o", "--output", default="acceptance-output")
    v.set_defaults(func=_cmd_verify)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
