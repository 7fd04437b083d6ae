"""Exact simulation of the vertex reinforced random walk on Z or on a segment.

From ``x`` the walk jumps to ``x+1`` with probability
``w(Z(x+1)) / (w(Z(x+1)) + w(Z(x-1)))``, where ``Z`` counts visits including
the initial endowment ``z0``.  On a segment the endpoints push the walk inward.

Besides the local times the walk can maintain, for registered sites ``x``:

* ``Y+(x)``, ``Y-(x)``: sums of ``1/w(Z(x+-1))`` over jumps ``x -> x+-1``,
  using the destination's local time before the jump;
* ``h(x)``: sum over arrivals at ``x`` of ``(2 p - 1) / w(Z(x))``, with ``p`` the
  probability that the next jump goes left and ``Z(x)`` counting the arrival;
* jump counts ``N(x, x+-1)`` (kept for every edge, with the running maximum of
  ``|N(x, x+1) - N(x+1, x)|``).
"""

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernel as K
from .rng import BLOCK, split
from .weights import ResourceLimitError, WeightSpec, eval_W, inv_W

SCHEMA = "vrrw.runrecord/1"
MAX_SITES = 2**26


class ConfigError(ValueError):
    pass


class InfeasibleConfigError(ConfigError):
    def __init__(self, constraint, message):
        super().__init__(f"{constraint}: {message}")
        self.constraint = constraint


# initial configurations -------------------------------------------------------------

@dataclass(frozen=True)
class InitialConfig:
    """Finitely supported initial local times ``z0`` and the starting site."""

    z0: tuple = ()
    start: int = 0
    name: str = "custom"

    def __post_init__(self):
        items = tuple(sorted((int(s), int(v)) for s, v in dict(self.z0).items() if int(v) != 0))
        for s, v in items:
            if v < 0:
                raise ConfigError(f"negative initial local time z0({s}) = {v}")
        object.__setattr__(self, "z0", items)

    @classmethod
    def C0(cls):
        return cls(((0, 1),), 0, "C0")

    @classmethod
    def custom(cls, mapping, start=0):
        return cls(tuple(dict(mapping).items()), start, "custom")

    def __getitem__(self, site):
        return dict(self.z0).get(site, 0)

    @property
    def mapping(self):
        return dict(self.z0)

    def to_dict(self):
        return {"name": self.name, "start": self.start, "z0": {str(s): v for s, v in self.z0}}

    @classmethod
    def from_dict(cls, d):
        if isinstance(d, str):
            if d == "C0":
                return cls.C0()
            raise ConfigError(f"unknown named configuration {d!r}")
        z0 = {int(k): int(v) for k, v in d.get("z0", {}).items()}
        return cls(tuple(z0.items()), int(d.get("start", 0)), d.get("name", "custom"))


def _largest_at_most(spec, value):
    """Largest integer m >= 0 with W(m) <= value (None when value < 0)."""
    if value < 0:
        return None
    m = int(math.floor(inv_W(spec, value)))
    while m > 0 and eval_W(spec, m) > value:
        m -= 1
    while eval_W(spec, m + 1) <= value:
        m += 1
    return m


def check_CNEtaBeta(spec, config, N, eta, beta):
    """Names of the violated constraints of the (N, eta, beta) configuration set."""
    z = config.mapping
    z0, z1, z2, z3 = (z.get(s, 0) for s in (0, -1, -2, -3))
    bad = []
    if z1 > z2 + z0:
        bad.append("z0(-1) <= z0(-2) + z0(0)")
    if min(z1, z0) < N:
        bad.append("min(z0(-1), z0(0)) >= N")
    if eval_W(spec, z2) > eval_W(spec, z0) - eta:
        bad.append("W(z0(-2)) <= W(z0(0)) - eta")
    if eval_W(spec, z3) > eval_W(spec, z1) / 2 - beta:
        bad.append("W(z0(-3)) <= W(z0(-1))/2 - beta")
    return bad


def build_CNEtaBeta(spec, N, eta, beta):
    """A configuration in the (N, eta, beta) set: z0(0) = z0(-1) = N and the
    largest z0(-2), z0(-3) allowed by the two W constraints."""
    if not 0 < eta < 1:
        raise ConfigError("eta must lie in (0, 1)")
    if N < 1 or int(N) != N:
        raise ConfigError("N must be a positive integer")
    N = int(N)
    wn = eval_W(spec, N)
    z2 = _largest_at_most(spec, wn - eta)
    if z2 is None:
        raise InfeasibleConfigError("W(z0(-2)) <= W(z0(0)) - eta", f"W(N) = {wn} < eta = {eta}")
    z3 = _largest_at_most(spec, wn / 2 - beta)
    if z3 is None:
        raise InfeasibleConfigError("W(z0(-3)) <= W(z0(-1))/2 - beta",
                                    f"W(N)/2 - beta = {wn / 2 - beta} < 0; beta too large for N = {N}")
    config = InitialConfig(((0, N), (-1, N), (-2, z2), (-3, z3)), 0, f"CNEtaBeta(N={N},eta={eta},beta={beta})")
    bad = check_CNEtaBeta(spec, config, N, eta, beta)
    if bad:
        raise InfeasibleConfigError(bad[0], "constructed configuration violates it")
    return config


# walk state --------------------------------------------------------------------------

class WalkState:
    """Mutable state of one walk.  Create with :func:`new_walk`."""

    def __init__(self, spec, config, bounds, seed, replica, track, max_sites):
        self.spec = spec
        self.config = config
        self.bounds = None if bounds is None else (int(bounds[0]), int(bounds[1]))
        self.seed = int(seed)
        self.replica = int(replica)
        self.max_sites = int(max_sites)
        self.truncated = False
        self.track_all = track == "all"
        self.tracked = None if track in (None, "all") else sorted({int(s) for s in track})

        sites = [s for s, _ in config.z0] + [config.start]
        if self.bounds is not None:
            left, right = self.bounds
            if left > right or not left <= config.start <= right:
                raise ConfigError(f"start {config.start} outside bounds {self.bounds}")
            sites += [left, right]
        if self.tracked:
            sites += self.tracked
        lo, hi = min(sites) - 64, max(sites) + 64
        self.offset = -lo
        size = hi - lo + 1
        self.Z = np.zeros(size, dtype=np.int64)
        for s, v in config.z0:
            self.Z[s + self.offset] = v
        self.wtab = np.asarray(spec.w(np.arange(max(1024, 2 * int(self.Z.max()) + 2))), dtype=np.float64)
        self.wz = self.wtab[self.Z]
        self.track = np.zeros(size, dtype=np.bool_)
        if self.track_all:
            self.track[:] = True
        elif self.tracked:
            self.track[np.asarray(self.tracked) + self.offset] = True
        self.yp, self.yp_c, self.ym, self.ym_c, self.h, self.h_c = (np.zeros(size) for _ in range(6))
        self.jr = np.zeros(size, dtype=np.int64)
        self.jl = np.zeros(size, dtype=np.int64)
        self.ctl = np.zeros(7, dtype=np.int64)
        self.ctl[K.POS] = config.start + self.offset
        if self.bounds is not None:
            self.ctl[K.BOUNDED] = 1
            self.ctl[K.LEFT] = self.bounds[0] + self.offset
            self.ctl[K.RIGHT] = self.bounds[1] + self.offset
        self.gen = split(self.seed, self.replica)
        self.u = np.empty(0)

    # views -------------------------------------------------------------------------

    @property
    def n(self):
        return int(self.ctl[K.N])

    @property
    def position(self):
        return int(self.ctl[K.POS]) - self.offset

    @property
    def max_crossing_gap(self):
        return int(self.ctl[K.GAP])

    def local_time(self, site):
        i = site + self.offset
        return int(self.Z[i]) if 0 <= i < self.Z.size else self.config[site]

    def z0_array(self):
        z0 = np.zeros(self.Z.size, dtype=np.int64)
        for s, v in self.config.z0:
            z0[s + self.offset] = v
        return z0

    def visited_range(self):
        dz = self.Z - self.z0_array()
        nz = np.flatnonzero(dz)
        pos = int(self.ctl[K.POS])
        if nz.size == 0:
            return pos, pos
        return int(min(nz[0], pos)), int(max(nz[-1], pos))

    def tracker(self, name):
        """Tracker values by site as a dict (Y_plus, Y_minus, M, h, N_right, N_left)."""
        idx = self._tracker_indices()
        sites = (idx - self.offset).tolist()
        vals = self._tracker_arrays(idx)[name]
        return dict(zip(sites, vals))

    def _tracker_indices(self):
        if self.track_all:
            a, b = self.visited_range()
            return np.arange(max(a - 1, 1), min(b + 2, self.Z.size - 1))
        if self.tracked:
            return np.asarray(self.tracked, dtype=np.int64) + self.offset
        return np.zeros(0, dtype=np.int64)

    def _tracker_arrays(self, idx):
        yp = self.yp[idx] + self.yp_c[idx]
        ym = self.ym[idx] + self.ym_c[idx]
        return {
            "Y_plus": yp.tolist(),
            "Y_minus": ym.tolist(),
            "M": (yp - ym).tolist(),
            "h": (self.h[idx] + self.h_c[idx]).tolist(),
            "N_right": self.jr[idx].tolist(),
            "N_left": self.jl[idx - 1].tolist(),
        }

    def snapshot(self):
        a, b = self.visited_range()
        dz = (self.Z - self.z0_array())[a:b + 1]
        snap = {
            "type": "checkpoint",
            "n": self.n,
            "position": self.position,
            "dz": {"lo": a - self.offset, "values": dz.tolist()},
            "max_crossing_gap": self.max_crossing_gap,
        }
        idx = self._tracker_indices()
        if idx.size:
            snap["trackers"] = {"sites": (idx - self.offset).tolist(), **self._tracker_arrays(idx)}
        return snap

    # mechanics ---------------------------------------------------------------------

    def _grow(self):
        size = self.Z.size
        new = 2 * size
        if new > self.max_sites:
            raise ResourceLimitError(f"local-time array would exceed {self.max_sites} sites",
                                     attained=size)
        shift = size // 2
        self.offset += shift

        def widen(arr, fill=0):
            out = np.full(new, fill, dtype=arr.dtype)
            out[shift:shift + size] = arr
            return out

        self.Z = widen(self.Z)
        self.wz = widen(self.wz, self.wtab[0])
        self.track = widen(self.track, self.track_all)
        for name in ("yp", "yp_c", "ym", "ym_c", "h", "h_c", "jr", "jl"):
            setattr(self, name, widen(getattr(self, name)))
        self.ctl[K.POS] += shift
        if self.ctl[K.BOUNDED]:
            self.ctl[K.LEFT] += shift
            self.ctl[K.RIGHT] += shift

    def _more_weights(self):
        self.wtab = np.asarray(self.spec.w(np.arange(2 * self.wtab.size)), dtype=np.float64)

    def advance_to(self, n_stop):
        """Run until ``n == n_stop``; returns False if the run had to stop early."""
        while self.n < n_stop:
            status = K.advance(self.ctl, n_stop, self.Z, self.wz, self.wtab, self.u, self.track,
                               self.yp, self.yp_c, self.ym, self.ym_c, self.h, self.h_c,
                               self.jr, self.jl)
            if status == K.NEED_UNIFORMS:
                # one uniform per step; Philox doubles are sequential, so the
                # stream does not depend on how it is cut into blocks
                self.u = self.gen.random(min(BLOCK, n_stop - self.n))
                self.ctl[K.UPTR] = 0
            elif status == K.NEED_ROOM:
                try:
                    self._grow()
                except ResourceLimitError:
                    self.truncated = True
                    return False
            elif status == K.NEED_WEIGHTS:
                self._more_weights()
        return True


def new_walk(config, spec, bounds=None, seed=0, replica=0, track=None, max_sites=MAX_SITES):
    """Fresh walk at n = 0.

    ``track`` selects tracker sites: None (off), ``"all"``, or an iterable of sites.
    """
    if not isinstance(spec, WeightSpec):
        raise TypeError("spec must be a WeightSpec")
    return WalkState(spec, config, bounds, seed, replica, track, max_sites)


def step(state):
    """Advance one step (in place) and return the state."""
    state.advance_to(state.n + 1)
    return state


# run records -------------------------------------------------------------------------

@dataclass
class RunRecord:
    header: dict
    checkpoints: list = field(default_factory=list)
    final: dict = field(default_factory=dict)

    def lines(self):
        dump = lambda obj: json.dumps(obj, sort_keys=True, separators=(",", ":"))
        yield dump(self.header)
        for c in self.checkpoints:
            yield dump(c)
        yield dump(self.final)

    def to_jsonl(self):
        return "\n".join(self.lines()) + "\n"

    def write(self, path):
        with open(path, "w") as fh:
            fh.write(self.to_jsonl())

    @classmethod
    def from_lines(cls, lines):
        header, checkpoints, final = None, [], {}
        for line in lines:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            kind = obj.get("type")
            if kind == "header":
                if header is not None:
                    yield cls(header, checkpoints, final)
                    checkpoints, final = [], {}
                header = obj
            elif kind == "checkpoint":
                checkpoints.append(obj)
            elif kind == "final":
                final = obj
        if header is not None:
            yield cls(header, checkpoints, final)

    @classmethod
    def read(cls, path):
        """All records stored in a JSONL file (one or more)."""
        with open(path) as fh:
            return list(cls.from_lines(fh))

    # convenience -------------------------------------------------------------------

    @property
    def spec(self):
        return WeightSpec.from_dict(self.header["spec"])

    @property
    def config(self):
        return InitialConfig.from_dict(self.header["config"])

    @property
    def ns(self):
        return [c["n"] for c in self.checkpoints]

    def checkpoint_at(self, n):
        for c in self.checkpoints:
            if c["n"] == n:
                return c
        return None

    def local_times(self, checkpoint, sites):
        """Z_n at ``sites`` for a checkpoint dict (initial endowment included)."""
        lo = checkpoint["dz"]["lo"]
        vals = checkpoint["dz"]["values"]
        z0 = self.config.mapping
        out = []
        for s in sites:
            k = s - lo
            d = vals[k] if 0 <= k < len(vals) else 0
            out.append(z0.get(s, 0) + d)
        return np.asarray(out, dtype=np.int64)


def run(state, horizon, checkpoints=(), phis=(0.1,), fingerprint="", spec_id=None):
    """Advance ``state`` to ``horizon`` with snapshots at ``checkpoints``."""
    horizon = int(horizon)
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    cps = sorted({int(c) for c in checkpoints if 0 <= int(c) <= horizon} | {horizon})
    if list(checkpoints) != sorted(checkpoints):
        raise ValueError("checkpoint schedule must be sorted")
    header = {
        "type": "header",
        "schema": SCHEMA,
        "fingerprint": fingerprint,
        "spec_id": spec_id or state.spec.label,
        "spec": state.spec.to_dict(),
        "config": state.config.to_dict(),
        "bounds": None if state.bounds is None else list(state.bounds),
        "seed": state.seed,
        "replica": state.replica,
        "horizon": horizon,
        "phis": [float(p) for p in phis],
        "tracked": "all" if state.track_all else state.tracked,
    }
    record = RunRecord(header)
    for c in cps:
        if c < state.n:
            continue
        if not state.advance_to(c):
            break
        record.checkpoints.append(state.snapshot())
    from .diagnostics import InsufficientDataError, tail_support

    supports = {}
    for phi in phis:
        try:
            ts = tail_support(record, phi)
            supports[repr(float(phi))] = {"sites": ts.sites, "cardinality": ts.cardinality}
        except InsufficientDataError:
            pass
    record.final = {
        "type": "final",
        "n": state.n,
        "position": state.position,
        "truncated": state.truncated,
        "max_crossing_gap": state.max_crossing_gap,
        "tail_support": supports,
    }
    return record


def tail_schedule(horizons, phis=(0.1,), extra=()):
    """Checkpoints that make tail supports computable at each horizon and window."""
    pts = set(int(h) for h in horizons) | {int(e) for e in extra}
    for h in horizons:
        for phi in phis:
            pts.add(int(h) - int(round(phi * int(h))))
    return sorted(pts)


__all__ = [
    "InitialConfig", "WalkState", "RunRecord", "ConfigError", "InfeasibleConfigError",
    "new_walk", "step", "run", "build_CNEtaBeta", "check_CNEtaBeta", "tail_schedule",
]
