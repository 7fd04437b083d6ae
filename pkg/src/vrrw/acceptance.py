"""The acceptance suite, shared by ``vrrw verify`` and ``tests/test_acceptance.py``.

Each ``criterion_k`` returns a :class:`CriterionResult`.  Thresholds are the
committed ones; they are never adjusted to make a run pass.
"""

import itertools
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .criticals import (Parameter, check_scaling, consistency_gate, estimate_critical,
                        integrate, partial_J, partial_J_tilde)
from .diagnostics import crossing_gap, eqW_residual, interior_sites, tail_support
from .oracles import family_oracle
from .simulator import InitialConfig, new_walk, run, tail_schedule
from .weights import W_limit, WeightSpec, eval_H, eval_W, inv_H, inv_W, series_tests

SIM_SEED = 20260101          # criterion 7 (and the crossing-gap part of 9)
MARTINGALE_SEED = 20260102   # criterion 8
ROUNDTRIP_SEED = 20260103    # criterion 9
POWER2_THRESHOLD = 80        # frozen after the calibration run (100/100 observed)

LINEAR = WeightSpec.linear()
POWER2 = WeightSpec.power(2)


@dataclass
class CriterionResult:
    id: int
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0
    data: dict = field(default_factory=dict)

    def line(self):
        return f"[{'PASS' if self.passed else 'FAIL'}] criterion {self.id}: {self.name} ({self.seconds:.1f}s) {self.detail}"


class Context:
    """Shared state between criteria (criterion 9 reuses the criterion-7 runs)."""

    def __init__(self, output=None, workers=1):
        self.output = output
        self.workers = max(1, int(workers))
        self._sims = None
        self._estimates = None

    def simulations(self):
        if self._sims is None:
            self._sims = _regime_runs(self.workers)
        return self._sims

    def estimates(self):
        if self._estimates is None:
            self._estimates = _regime_estimates()
        return self._estimates


def _timed(fn):
    def wrapper(ctx=None):
        ctx = ctx or Context()
        t = time.perf_counter()
        res = fn(ctx)
        res.seconds = time.perf_counter() - t
        return res
    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


# 1 ---------------------------------------------------------------------------------------

@_timed
def criterion_1(ctx):
    """Y+(x-1) + Y-(x+1) = W(Z(x)) - W(z0(x)) on every interior site and checkpoint."""
    tol, worst, counted = 1e-8, 0.0, 0
    schedule = sorted({0, 10, 100, 1000, 10**4} | set(tail_schedule([10**5, 10**6])))
    for spec in (LINEAR, POWER2):
        st = new_walk(InitialConfig.C0(), spec, seed=SIM_SEED, track="all")
        rec = run(st, 10**6, schedule)
        for x in interior_sites(rec):
            worst = max(worst, eqW_residual(rec, x).summary["max"])
            counted += 1
    return CriterionResult(1, "local-time identity", worst <= tol and counted > 0,
                           f"max residual {worst:.2e} over {counted} site series (tol {tol:g})",
                           data={"max_residual": worst, "sites": counted})


# 2 and 3 -----------------------------------------------------------------------------------

GRID = list(itertools.product((LINEAR, POWER2), (0.5, 2.0, 3.0), (-2.0, 0.0, 1.0), (1e2, 1e4)))


@_timed
def criterion_2(ctx):
    """Exact scaling law of the partial J integrals."""
    worst = 0.0
    for spec, lam, beta, T in GRID:
        val = partial_J(spec.scaled(lam), beta, T)
        worst = max(worst, check_scaling(spec, lam, beta, T) / max(1.0, val))
    return CriterionResult(2, "scaling identity", worst <= 1e-9,
                           f"max scaled residual {worst:.2e} (tol 1e-9)", data={"worst": worst})


@_timed
def criterion_3(ctx):
    """The H-corrected integral dominates the plain one."""
    margins = []
    for spec, _, beta, T in {(s, 0, b, t) for s, _, b, t in GRID}:
        margins.append(partial_J_tilde(spec, beta, T) - partial_J(spec, beta, T))
    worst = min(margins)
    return CriterionResult(3, "domination J~ >= J", worst >= -1e-12,
                           f"min J~ - J = {worst:.3g} over {len(margins)} cases",
                           data={"min_margin": worst})


# 4 ---------------------------------------------------------------------------------------

ORACLE_CASES = [
    (LINEAR, [("I", 1.0, 1e3), ("J", 0.0, 1e2), ("J_tilde", 0.0, 1e2), ("J", -1.0, 1e2)]),
    (POWER2, [("I", 0.1, 1e3), ("J", 0.0, 1e3), ("J_tilde", 0.0, 1e3), ("J", -1.0, 1e3)]),
    (WeightSpec.sublog(0.3), [("I", 1.0, 1e3), ("J", 0.0, 1e3), ("J_tilde", 0.0, 1e3)]),
]


@_timed
def criterion_4(ctx):
    """Breakpoint integration against the dense Riemann-sum oracle."""
    worst, rows = 0.0, []
    for spec, cases in ORACLE_CASES:
        oracle = family_oracle(spec)
        for kind, p, T in cases:
            ref = oracle.integrate(kind, p, T)
            val = float(integrate(spec, kind, p, [T]).values[0])
            rel = abs(val - ref) / abs(ref)
            worst = max(worst, rel)
            rows.append({"spec": spec.label, "kind": kind, "param": p, "T": T,
                         "value": val, "oracle": ref, "rel": rel})
    return CriterionResult(4, "oracle equivalence", worst <= 1e-7,
                           f"max rel. error {worst:.2e} over {len(rows)} integrals (tol 1e-7)",
                           data={"rows": rows})


# 5 and 6 ---------------------------------------------------------------------------------

REGIME_SPECS = {
    "constant": WeightSpec.constant(1.0),
    "power2": POWER2,
    "linear": LINEAR,
    "sublog0.3": WeightSpec.sublog(0.3),
    "sublog0.7": WeightSpec.sublog(0.7),
}

EXPECTED = {
    "constant": {"recip": "Divergent", "BetaC": "PlusInfinity"},
    "power2": {"recip": "Finite"},
    "linear": {"BetaC": "MinusInfinity"},
    "sublog0.3": {"BetaC": "MinusInfinity", "BetaTildeC": "MinusInfinity"},
    "sublog0.7": {"BetaC": "PlusInfinity", "BetaTildeC": "PlusInfinity"},
}


def _regime_estimates():
    out = {}
    for key, spec in REGIME_SPECS.items():
        series = series_tests(spec)
        bc = estimate_critical(spec, Parameter.BETA_C)
        btc = estimate_critical(spec, Parameter.BETA_TILDE_C)
        out[key] = {"spec": spec, "series": series, "BetaC": bc, "BetaTildeC": btc}
    return out


@_timed
def criterion_5(ctx):
    """Classifier verdicts in the five anchored regimes, with traces written to disk."""
    est = ctx.estimates()
    misses = []
    for key, want in EXPECTED.items():
        e = est[key]
        got = {"recip": e["series"]["recip"].verdict.value,
               "BetaC": e["BetaC"].verdict, "BetaTildeC": e["BetaTildeC"].verdict}
        misses += [f"{key}.{k}={got[k]} (want {v})" for k, v in want.items() if got[k] != v]
    paths = []
    if ctx.output:
        os.makedirs(ctx.output, exist_ok=True)
        for key, e in est.items():
            path = os.path.join(ctx.output, f"classifier_{key}.json")
            with open(path, "w") as fh:
                json.dump({"label": e["spec"].label,
                           "series": {k: v.to_dict() for k, v in e["series"].items()},
                           "BetaC": e["BetaC"].to_dict(),
                           "BetaTildeC": e["BetaTildeC"].to_dict()}, fh, indent=1, sort_keys=True)
            paths.append(path)
    summary = ", ".join(f"{k}: {est[k]['BetaC'].verdict}/{est[k]['BetaTildeC'].verdict}" for k in est)
    return CriterionResult(5, "classifier regimes", not misses,
                           "; ".join(misses) if misses else summary, data={"traces": paths})


@_timed
def criterion_6(ctx):
    """No regime estimate contradicts the summability of 1/w^2."""
    problems = []
    for key, e in ctx.estimates().items():
        problems += [f"{key}: {p}" for p in consistency_gate(e["BetaC"], e["BetaTildeC"], e["series"])]
    return CriterionResult(6, "consistency gate", not problems,
                           "; ".join(problems) if problems else "zero violations")


# 7 ---------------------------------------------------------------------------------------

SIM_PLANS = {
    "power2": (POWER2, [10**6]),
    "linear": (LINEAR, [10**5, 10**6, 10**7]),
    "power0.4": (WeightSpec.power(0.4), [10**5, 10**7]),
}


def _sim_task(args):
    key, replica = args
    spec, horizons = SIM_PLANS[key]
    st = new_walk(InitialConfig.C0(), spec, seed=SIM_SEED, replica=replica)
    rec = run(st, horizons[-1], tail_schedule(horizons))
    cards = {h: tail_support(rec, 0.1, h).cardinality for h in horizons}
    return key, replica, cards, crossing_gap(rec)


def _regime_runs(workers, replicas=100):
    tasks = [(k, r) for k in SIM_PLANS for r in range(replicas)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sim_task, tasks, chunksize=4))
    else:
        results = [_sim_task(t) for t in tasks]
    out = {k: {"cards": [None] * replicas, "gaps": [None] * replicas} for k in SIM_PLANS}
    for key, r, cards, gap in results:
        out[key]["cards"][r] = cards
        out[key]["gaps"][r] = gap
    return out


def _mode(values):
    vals, counts = np.unique(values, return_counts=True)
    return int(vals[np.argmax(counts)]), dict(zip(vals.tolist(), counts.tolist()))


@_timed
def criterion_7(ctx):
    """Tail-support regimes over 100 fixed-seed replicas per weight."""
    sims = ctx.simulations()
    checks, notes = [], []

    p2 = [c[10**6] for c in sims["power2"]["cards"]]
    mode, hist = _mode(p2)
    ok = mode == 2 and hist.get(2, 0) >= POWER2_THRESHOLD
    checks.append(ok)
    notes.append(f"power(2) mode {mode}, {hist.get(2, 0)}/100 at 2")

    lin = sims["linear"]["cards"]
    fracs = [sum(c[h] == 5 for c in lin) / len(lin) for h in (10**5, 10**6, 10**7)]
    mode6, hist6 = _mode([c[10**6] for c in lin])
    ok_mode = mode6 == 5
    ok_mono = fracs[0] <= fracs[1] <= fracs[2]
    checks += [ok_mode, ok_mono]
    notes.append(f"linear mode@1e6 {mode6} {hist6}, five-site fractions {fracs}")

    p4 = sims["power0.4"]["cards"]
    grew = sum(c[10**7] > c[10**5] for c in p4)
    checks.append(grew >= 80)
    notes.append(f"power(0.4) grew on {grew}/100")
    return CriterionResult(7, "simulation regimes", all(checks), "; ".join(notes),
                           data={"power2_hist": hist, "linear_hist_1e6": hist6,
                                 "linear_fractions": fracs, "power04_grew": grew,
                                 "checks": {"power2": checks[0], "linear_mode": checks[1],
                                            "linear_monotone": checks[2], "power04": checks[3]}})


# 8 ---------------------------------------------------------------------------------------

def _martingale_task(replica):
    st = new_walk(InitialConfig.C0(), LINEAR, seed=MARTINGALE_SEED, replica=replica, track=[0])
    st.advance_to(10**5)
    return st.tracker("M")[0]


@_timed
def criterion_8(ctx, replicas=200):
    """Mean and variance of M_n(0) under linear reinforcement."""
    if ctx.workers > 1:
        with ProcessPoolExecutor(max_workers=ctx.workers) as pool:
            m = np.array(list(pool.map(_martingale_task, range(replicas), chunksize=8)))
    else:
        m = np.array([_martingale_task(r) for r in range(replicas)])
    mean, sd = float(m.mean()), float(m.std(ddof=1))
    var = sd * sd
    k = np.arange(1, 2**22)
    # remainder of sum 1/(k+1)^2 beyond the table is about 1/2**22
    bound = 4.0 * (float(np.sum(1.0 / LINEAR.w(k) ** 2)) + 1.0 / 2**22)
    ok_mean = abs(mean) <= 4 * sd / math.sqrt(replicas)
    ok_var = var <= bound
    return CriterionResult(8, "martingale checks", ok_mean and ok_var,
                           f"|mean| {abs(mean):.4f} <= {4 * sd / math.sqrt(replicas):.4f}: {ok_mean}; "
                           f"var {var:.4f} <= {bound:.4f}: {ok_var}",
                           data={"mean": mean, "var": var, "bound": bound})


# 9 ---------------------------------------------------------------------------------------

ROUNDTRIP_FAMILIES = [
    WeightSpec.constant(1.0), LINEAR, POWER2, WeightSpec.power(0.4),
    WeightSpec.sublog(0.3), WeightSpec.sublog(0.7), WeightSpec.superlog(1.0),
    WeightSpec.tabulated([1, 2, 2, 3, 5, 8], "power", 1.0),
]


@_timed
def criterion_9(ctx):
    """Round trips, H bounds, crossing gaps and the 101/144 value."""
    rng = np.random.default_rng(ROUNDTRIP_SEED)
    worst_rt, h_bad, hinv_bad = 0.0, 0, 0
    for spec in ROUNDTRIP_FAMILIES:
        lim = W_limit(spec)
        top = lim if math.isfinite(lim) else eval_W(spec, 1e6)
        u = rng.uniform(0.0, top, 1000)
        x = inv_W(spec, u)
        worst_rt = max(worst_rt, float(np.max(np.abs(eval_W(spec, x) - u) / np.maximum(1.0, u))))
        h_bad += int(np.count_nonzero(~(eval_H(spec, x) >= x)))
        # H^-1(y) is 0 below H(0), so only y >= H(0) needs a solve
        for y in x[x >= eval_H(spec, 0.0)]:
            hinv_bad += int(not inv_H(spec, float(y)) <= y)
    gaps = [g for s in ctx.simulations().values() for g in s["gaps"]]
    gap = max(gaps)
    v = partial_J(LINEAR, 0.0, 1.0)
    rel = abs(v - 101 / 144) / (101 / 144)
    ok = worst_rt <= 1e-12 and h_bad == 0 and hinv_bad == 0 and gap <= 1 and rel <= 1e-12
    return CriterionResult(9, "structural micro-checks", ok,
                           f"round trip {worst_rt:.1e}, H<x {h_bad}, H^-1>x {hinv_bad}, "
                           f"crossing gap {gap} over {len(gaps)} runs, 101/144 rel {rel:.1e}")


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
            criterion_6, criterion_7, criterion_8, criterion_9]


def run_all(only=None, workers=1, output=None, report=print):
    ctx = Context(output=output, workers=workers)
    results = []
    for i, fn in enumerate(CRITERIA, start=1):
        if only and i not in only:
            continue
        try:
            res = fn(ctx)
        except Exception as exc:  # a crash is a failure, not an abort
            res = CriterionResult(i, fn.__name__, False, f"error: {type(exc).__name__}: {exc}")
        results.append(res)
        if report:
            report(res.line())
    if output:
        os.makedirs(output, exist_ok=True)
        with open(os.path.join(output, "acceptance.json"), "w") as fh:
            json.dump([asdict(r) for r in results], fh, indent=1, sort_keys=True, default=str)
    return results
