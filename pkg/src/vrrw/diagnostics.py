"""Signatures of localization computed from run records.

Everything here is a pure function of :class:`~vrrw.simulator.RunRecord` data.
The indicators are descriptive statistics of finite runs and carry no claim
about the almost-sure limits they are modelled on.
"""

from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .weights import eval_W


class InsufficientDataError(ValueError):
    pass


class TrackerError(ValueError):
    pass


@dataclass
class TailSupport:
    phi: float
    horizon: int
    sites: list
    cardinality: int
    visited: list = field(default_factory=list)


@dataclass
class MonitorSeries:
    name: str
    ns: list
    values: list
    summary: dict = field(default_factory=dict)

    def __post_init__(self):
        if any(b <= a for a, b in zip(self.ns, self.ns[1:])):
            raise ValueError("checkpoints must be strictly increasing")

    def rows(self):
        return [(self.name, n, v) for n, v in zip(self.ns, self.values)]


def _field(cp):
    lo = cp["dz"]["lo"]
    return lo, np.asarray(cp["dz"]["values"], dtype=np.int64)


def tail_support(record, phi=0.1, horizon=None):
    """Sites whose local time grew during the last ``phi`` fraction of the steps up to ``horizon``."""
    if not 0 < phi < 1:
        raise ValueError("phi must lie in (0, 1)")
    if not record.checkpoints:
        raise InsufficientDataError("record has no checkpoints")
    end = record.checkpoints[-1]["n"] if horizon is None else int(horizon)
    start = end - int(round(phi * end))
    c_end, c_start = record.checkpoint_at(end), record.checkpoint_at(start)
    if c_end is None or c_start is None:
        raise InsufficientDataError(f"need checkpoints at n={start} and n={end} for phi={phi}")
    lo_e, v_e = _field(c_end)
    lo_s, v_s = _field(c_start)
    lo = min(lo_e, lo_s)
    hi = max(lo_e + v_e.size, lo_s + v_s.size)
    grown = np.zeros(hi - lo, dtype=np.int64)
    grown[lo_e - lo:lo_e - lo + v_e.size] += v_e
    grown[lo_s - lo:lo_s - lo + v_s.size] -= v_s
    sites = (np.flatnonzero(grown > 0) + lo).tolist()
    visited = (np.flatnonzero(v_e > 0) + lo_e).tolist()
    return TailSupport(float(phi), end, sites, len(sites), visited)


def support_horizons(record, phi=0.1):
    """Checkpoint times at which :func:`tail_support` is computable."""
    ns = set(record.ns)
    return [n for n in record.ns if n > 0 and n - int(round(phi * n)) in ns]


def _tracker_values(record, cp, name, sites):
    """Tracker ``name`` at ``sites``; with every site tracked, unreached sites read 0."""
    tr = cp.get("trackers")
    if tr is None:
        if record.header.get("tracked") == "all":
            return [0.0] * len(sites)
        raise TrackerError("record carries no trackers")
    index = {s: i for i, s in enumerate(tr["sites"])}
    missing = [s for s in sites if s not in index]
    if missing and record.header.get("tracked") != "all":
        raise TrackerError(f"sites {missing} are not tracked")
    return [tr[name][index[s]] if s in index else 0.0 for s in sites]


def eqW_residual(record, x):
    """|Y+(x-1) + Y-(x+1) - (W(Z(x)) - W(z0(x)))| at every checkpoint."""
    spec = record.spec
    z0 = record.config[x]
    w0 = eval_W(spec, z0)
    ns, vals = [], []
    for cp in record.checkpoints:
        lhs = (_tracker_values(record, cp, "Y_plus", [x - 1])[0]
               + _tracker_values(record, cp, "Y_minus", [x + 1])[0])
        zx = int(record.local_times(cp, [x])[0])
        rhs = eval_W(spec, zx) - w0
        ns.append(cp["n"])
        vals.append(abs(lhs - rhs))
    return MonitorSeries(f"eqW_residual[{x}]", ns, vals, {"max": max(vals) if vals else 0.0})


def interior_sites(record, cp=None):
    """Sites x with x-1 and x+1 both tracked at a checkpoint (default: the last)."""
    cp = cp or record.checkpoints[-1]
    tr = cp.get("trackers")
    if tr is None:
        return []
    s = set(tr["sites"])
    return [x for x in tr["sites"] if x - 1 in s and x + 1 in s]


def _center(record, center):
    if center is not None:
        return int(center)
    cp = record.checkpoints[-1]
    lo, v = _field(cp)
    sites = np.arange(lo, lo + v.size)
    z = record.local_times(cp, sites.tolist())
    return int(sites[int(np.argmax(z))])


def _quarters(values):
    n = len(values)
    q = max(n // 4, 1)
    return values[:q], values[n - q:]


def center_dominance(record, center=None):
    """Z(c) - max(Z(c-1), Z(c+1)) along the checkpoints, c defaulting to the most visited site."""
    c = _center(record, center)
    ns, vals = [], []
    for cp in record.checkpoints:
        z = record.local_times(cp, [c - 1, c, c + 1])
        ns.append(cp["n"])
        vals.append(int(z[1] - max(z[0], z[2])))
    summary = {"center": c}
    if len(vals) < 2:
        summary.update(drift=None, undefined=True)
    else:
        first, last = _quarters(vals)
        summary.update(drift=float(np.mean(np.asarray(last) > max(first))), undefined=False)
    return MonitorSeries("center_dominance", ns, vals, summary)


def asymmetry_monitor(record, center=None):
    """W(Z(c-1)) - W(Z(c+1)) along the checkpoints."""
    spec = record.spec
    c = _center(record, center)
    ns, vals = [], []
    for cp in record.checkpoints:
        z = record.local_times(cp, [c - 1, c + 1])
        ns.append(cp["n"])
        vals.append(float(eval_W(spec, float(z[0])) - eval_W(spec, float(z[1]))))
    _, last = _quarters(vals)
    summary = {"center": c, "last": vals[-1] if vals else None,
               "oscillation": float(max(last) - min(last)) if vals else None}
    return MonitorSeries("asymmetry", ns, vals, summary)


def beta_envelope(record, sites=None, upto=None):
    """sup over checkpoints of W(Z(b)) - 2 W(Z(a)) for ``sites = (a, b)``.

    By default ``b`` is the most visited site and ``a = b - 2``.  This is the
    smallest shift for which ``W(Z(b)) <= 2 W(Z(a)) + shift`` held at every
    checkpoint seen (optionally only those with ``n <= upto``).
    """
    spec = record.spec
    if sites is None:
        c = _center(record, None)
        sites = (c - 2, c)
    a, b = sites
    best = -np.inf
    for cp in record.checkpoints:
        if upto is not None and cp["n"] > upto:
            break
        z = record.local_times(cp, [a, b])
        best = max(best, float(eval_W(spec, float(z[1])) - 2 * eval_W(spec, float(z[0]))))
    return best


def u_monitor(record):
    """U(n) = W(Z(-3)) - W(Z(-1))/2 and its running supremum (segment {-3, ..., 0} runs)."""
    if not record.checkpoints:
        raise InsufficientDataError("record has no checkpoints")
    bounds = record.header.get("bounds")
    if bounds is None or bounds[0] > -3 or bounds[1] < -1:
        raise TrackerError("U(n) needs a run on a segment containing -3 and -1")
    spec = record.spec
    ns, vals = [], []
    for cp in record.checkpoints:
        z = record.local_times(cp, [-3, -1])
        ns.append(cp["n"])
        vals.append(float(eval_W(spec, float(z[0])) - eval_W(spec, float(z[1])) / 2))
    sup = np.maximum.accumulate(vals).tolist()
    return MonitorSeries("U", ns, vals, {"running_sup": sup, "sup": sup[-1]})


@dataclass
class LocalizationRow:
    horizon: int
    histogram: dict
    mode: int | None
    fraction_five: float
    records: int


def _mode(counter):
    if not counter:
        return None
    top = max(counter.values())
    return min(k for k, v in counter.items() if v == top)


def localization_report(records, phi=0.1, horizons=None):
    """Histogram of tail-support cardinalities across records at each horizon."""
    records = list(records)
    if not records:
        raise ValueError("need at least one record")
    if horizons is None:
        horizons = sorted(set.intersection(*(set(support_horizons(r, phi)) for r in records)))
    rows = []
    for h in horizons:
        counts = Counter()
        for r in records:
            try:
                counts[tail_support(r, phi, h).cardinality] += 1
            except InsufficientDataError:
                continue
        total = sum(counts.values())
        rows.append(LocalizationRow(int(h), dict(sorted(counts.items())), _mode(counts),
                                    counts.get(5, 0) / total if total else 0.0, total))
    return rows


def crossing_gap(record):
    """Largest |N(x, x+1) - N(x+1, x)| seen over the whole run (must be <= 1)."""
    return int(record.final.get("max_crossing_gap", max((c["max_crossing_gap"] for c in record.checkpoints), default=0)))


__all__ = [
    "TailSupport", "MonitorSeries", "LocalizationRow", "InsufficientDataError", "TrackerError",
    "tail_support", "support_horizons", "eqW_residual", "interior_sites", "center_dominance",
    "asymmetry_monitor", "beta_envelope", "u_monitor", "localization_report", "crossing_gap",
]
