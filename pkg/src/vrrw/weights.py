"""Weight sequences and the exact primitives W, W^-1, H, H^-1.

With the convention ``w(t) = w(floor(t))`` the primitive ``W(t) = int_0^t du/w(u)``
is piecewise linear with slope ``1/w(m)`` on ``[m, m+1)``.  Everything here is
therefore evaluated from compensated prefix sums of ``1/w`` (and ``1/w**2``)
plus linear interpolation; no quadrature is involved inside the table.  Past
the table cap a smooth continuation (see ``_tail``) takes over and results
computed there are reported as approximate by the callers that care.
"""

import math
import warnings
from collections import OrderedDict
from dataclasses import asdict, dataclass, replace

import numpy as np

from ._numerics import cumsum_dd, dd_add, dd_diff, two_sum
from ._tail import SmoothTail

FAMILIES = ("constant", "power", "linear", "sublog", "superlog", "tabulated")
TAIL_RULES = (None, "constant", "power")

DEFAULT_CAP = 2**22
_MAX_TABLES = 8


class WeightError(ValueError):
    pass


class OutOfDomainError(WeightError):
    """Evaluation outside the range where the weight is defined."""


class DomainError(ValueError):
    pass


class ResourceLimitError(RuntimeError):
    """Table growth would exceed the configured cap."""

    def __init__(self, message, attained=None):
        super().__init__(message)
        self.attained = attained


@dataclass(frozen=True)
class WeightSpec:
    """A weight family ``w(n) > 0`` together with an optional multiplicative scale.

    Families (``n >= 0``):

    ========== ==================================
    constant   ``c``
    power      ``(n+1)**rho``
    linear     ``n + 1``
    sublog     ``(n+1) * exp(-(log(n+2))**alpha)``
    superlog   ``(n+1) * log(n+2)**gamma``
    tabulated  explicit values plus an optional tail rule
    ========== ==================================
    """

    family: str
    param: float | None = None
    scale: float = 1.0
    table: tuple | None = None
    tail_rule: str | None = None
    tail_param: float | None = None
    monotone_nondecreasing: bool = True

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise WeightError(f"unknown weight family {self.family!r}")
        if not self.scale > 0:
            raise WeightError("scale must be positive")
        needs_param = {"constant", "power", "sublog", "superlog"}
        if self.family in needs_param and self.param is None:
            raise WeightError(f"family {self.family!r} needs a parameter")
        if self.family == "constant" and not self.param > 0:
            raise WeightError("constant weight must be positive")
        if self.family == "tabulated":
            if not self.table:
                raise WeightError("tabulated weight needs a non-empty table")
            if min(self.table) <= 0:
                raise WeightError("weights must be positive")
            if self.tail_rule not in TAIL_RULES:
                raise WeightError(f"unknown tail rule {self.tail_rule!r}")
            if self.tail_rule == "power" and self.tail_param is None:
                raise WeightError("power tail rule needs an exponent")

    # constructors -----------------------------------------------------------------

    @classmethod
    def constant(cls, c=1.0):
        return cls("constant", float(c))

    @classmethod
    def power(cls, rho):
        return cls("power", float(rho))

    @classmethod
    def linear(cls):
        return cls("linear")

    @classmethod
    def sublog(cls, alpha):
        return cls("sublog", float(alpha))

    @classmethod
    def superlog(cls, gamma):
        return cls("superlog", float(gamma))

    @classmethod
    def tabulated(cls, values, tail_rule=None, tail_param=None):
        return cls("tabulated", table=tuple(float(v) for v in values),
                   tail_rule=tail_rule,
                   tail_param=None if tail_param is None else float(tail_param))

    def scaled(self, lam):
        return replace(self, scale=self.scale * float(lam))

    @property
    def label(self):
        if self.family == "linear":
            base = "linear"
        elif self.family == "tabulated":
            base = f"tabulated[{len(self.table)}]"
            if self.tail_rule:
                base += f"+{self.tail_rule}"
        else:
            base = f"{self.family}({self.param:g})"
        return base if self.scale == 1.0 else f"{self.scale:g}*{base}"

    def to_dict(self):
        d = {k: v for k, v in asdict(self).items() if v is not None}
        if self.table is not None:
            d["table"] = list(self.table)
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        if "path" in d:
            path = d.pop("path")
            base = load_tabulated(path)
            return replace(base, scale=float(d.get("scale", 1.0)))
        if d.get("table") is not None:
            d["table"] = tuple(float(v) for v in d["table"])
        if "rho" in d:
            d["param"] = d.pop("rho")
        for key in ("alpha", "gamma", "c"):
            if key in d:
                d["param"] = d.pop(key)
        return cls(**d)

    # evaluation -------------------------------------------------------------------

    @property
    def has_tail(self):
        return self.family != "tabulated" or self.tail_rule is not None

    def w(self, n):
        """w(n) for integer ``n`` (scalar or array)."""
        scalar = np.ndim(n) == 0
        n = np.asarray(n)
        if np.any(n < 0):
            raise DomainError("weights are indexed by nonnegative integers")
        out = self._closed_form(n.astype(np.float64), integer=True)
        return float(out) if scalar else out

    def w_cont(self, t):
        """The closed form evaluated at real ``t`` (used by the smooth tail)."""
        return self._closed_form(np.asarray(t, dtype=np.float64), integer=False)

    def _closed_form(self, x, integer):
        f = self.family
        with np.errstate(over="ignore"):
            if f == "constant":
                out = np.full(x.shape, self.param)
            elif f == "power":
                out = (x + 1.0) ** self.param
            elif f == "linear":
                out = x + 1.0
            elif f == "sublog":
                out = (x + 1.0) * np.exp(-np.log(x + 2.0) ** self.param)
            elif f == "superlog":
                out = (x + 1.0) * np.log(x + 2.0) ** self.param
            else:
                out = self._tabulated(x, integer)
        return self.scale * out

    def _tabulated(self, x, integer):
        table = np.asarray(self.table)
        size = table.size
        inside = x < size
        if not self.tail_rule and np.any(~inside):
            raise OutOfDomainError(
                f"tabulated weight has {size} entries and no tail rule; refusing to extrapolate")
        idx = np.clip(np.floor(x), 0, size - 1).astype(np.int64)
        out = table[idx]
        if self.tail_rule == "power":
            out = np.where(inside, out, table[-1] * ((x + 1.0) / size) ** self.tail_param)
        return out

    def check_monotone(self, probe=10**6):
        """Verify w(n+1) >= w(n) for n < probe; warns and returns False on failure."""
        if self.family == "tabulated" and not self.tail_rule:
            probe = min(probe, len(self.table))
        vals = self.w(np.arange(probe))
        ok = bool(np.all(np.diff(vals) >= 0))
        if self.monotone_nondecreasing and not ok:
            warnings.warn(f"weight {self.label} is not nondecreasing below n={probe}")
        return ok


def load_tabulated(path):
    """Read a two-column ``n w(n)`` file.

    A directive line ``# tail: constant`` or ``# tail: power <rho>`` sets the
    extrapolation rule; without one, evaluation past the table is refused.
    """
    values = {}
    tail_rule = tail_param = None
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line.lstrip("#").strip()
                if body.lower().startswith("tail:"):
                    parts = body.split(":", 1)[1].split()
                    if parts and parts[0] != "none":
                        tail_rule = parts[0]
                        if tail_rule == "power":
                            tail_param = float(parts[1])
                continue
            n, wn = line.split()[:2]
            values[int(n)] = float(wn)
    keys = sorted(values)
    if keys != list(range(len(keys))):
        raise WeightError(f"{path}: indices must be 0..N-1 without gaps")
    return WeightSpec.tabulated([values[k] for k in keys], tail_rule, tail_param)


# prefix tables ------------------------------------------------------------------------

class PrefixTable:
    """Compensated prefix sums ``S1[m] = sum_{k<m} 1/w(k)`` and ``S2`` (of ``1/w**2``).

    Stored as double-double (hi, lo) pairs, grown by doubling up to ``cap``.
    """

    def __init__(self, spec, cap=None):
        self.spec = spec
        cap = DEFAULT_CAP if cap is None else int(cap)
        if not spec.has_tail:
            cap = min(cap, len(spec.table))
        self.cap = cap
        self.size = 0
        self.s1_hi = np.zeros(1)
        self.s1_lo = np.zeros(1)
        self.s2_hi = np.zeros(1)
        self.s2_lo = np.zeros(1)
        self.frozen = False
        self._tail = None

    @property
    def capacity(self):
        return self.size

    def freeze(self):
        self.frozen = True

    def grow(self, m):
        """Make S[m] available (m clipped to the cap).  Returns the new size."""
        m = min(int(m), self.cap)
        if m <= self.size:
            return self.size
        if self.frozen:
            raise ResourceLimitError("prefix table is frozen", attained=self.size)
        new = min(self.cap, max(m, 2 * self.size, 1024))
        k = np.arange(self.size, new)
        wk = self.spec.w(k)
        r1 = 1.0 / wk
        h1, l1 = cumsum_dd(r1, self.s1_hi[-1], self.s1_lo[-1])
        h2, l2 = cumsum_dd(r1 * r1, self.s2_hi[-1], self.s2_lo[-1])
        self.s1_hi = np.concatenate((self.s1_hi, h1))
        self.s1_lo = np.concatenate((self.s1_lo, l1))
        self.s2_hi = np.concatenate((self.s2_hi, h2))
        self.s2_lo = np.concatenate((self.s2_lo, l2))
        self.size = new
        return new

    def grow_to_value(self, u):
        """Grow until S1 covers ``u`` or the cap is hit."""
        while self.s1_hi[-1] < u and self.size < self.cap:
            self.grow(2 * self.size if self.size else 1024)

    @property
    def full(self):
        return self.size >= self.cap

    @property
    def tail(self):
        """Smooth continuation starting at the cap (None for closed tabulated tables)."""
        if not self.spec.has_tail:
            return None
        if self._tail is None:
            self.grow(self.cap)
            spec = self.spec
            self._tail = SmoothTail(lambda t: spec.w_cont(t - 0.5), self.cap)
        return self._tail


_TABLES = OrderedDict()


def table_for(spec, cap=None):
    """Shared prefix table for ``spec`` (small LRU so big tables get released)."""
    key = (spec, cap)
    tab = _TABLES.get(key)
    if tab is None:
        tab = PrefixTable(spec, cap)
        _TABLES[key] = tab
        while len(_TABLES) > _MAX_TABLES:
            _TABLES.popitem(last=False)
    else:
        _TABLES.move_to_end(key)
    return tab


def clear_tables():
    _TABLES.clear()


def _no_tail(tab, what):
    return OutOfDomainError(
        f"{what} lies beyond the {tab.size} tabulated weights of {tab.spec.label} "
        "and no tail rule is given")


# W and W^-1 -------------------------------------------------------------------------

def W_dd(spec, t, tab=None):
    """W(t) as a double-double pair plus a mask of points evaluated by the smooth tail."""
    tab = tab or table_for(spec)
    t = np.asarray(t, dtype=np.float64)
    if np.any(t < 0):
        raise DomainError("W is defined on [0, inf)")
    finite_t = t[np.isfinite(t)]
    top = float(np.max(finite_t)) if finite_t.size else 0.0
    tab.grow(math.floor(min(top, tab.cap)) + 1)
    in_table = t < tab.size
    m = np.floor(np.where(in_table, t, 0.0)).astype(np.int64)
    frac = np.where(in_table, t, 0.0) - m
    hi, lo = dd_add(tab.s1_hi[m], tab.s1_lo[m], frac / spec.w(m), 0.0)
    approx = ~in_table
    if np.any(approx):
        tail = tab.tail
        if tail is None:
            raise _no_tail(tab, f"t={top}")
        th, tl = dd_add(tab.s1_hi[tab.cap], tab.s1_lo[tab.cap], tail.g(t[approx], 1), 0.0)
        hi = np.array(hi, dtype=np.float64)
        lo = np.array(lo, dtype=np.float64)
        hi[approx] = th
        lo[approx] = tl
    return hi, lo, approx


def locate(spec, u_hi, u_lo=0.0, tab=None):
    """Invert W at a double-double ``u``.

    Returns ``(m, theta, y_tail)``: inside the table ``W^-1(u) = m + theta`` with
    ``theta`` in [0, 1); where ``u`` lies past the table ``m == -1`` and ``y_tail``
    holds the (possibly infinite) continuation value.  ``u < 0`` maps to 0.
    """
    tab = tab or table_for(spec)
    u_hi = np.asarray(u_hi, dtype=np.float64)
    u_lo = np.broadcast_to(np.asarray(u_lo, dtype=np.float64), u_hi.shape)
    finite = u_hi[np.isfinite(u_hi)]
    if finite.size:
        tab.grow_to_value(float(np.max(finite)))
    neg = u_hi < 0
    beyond = u_hi > tab.s1_hi[tab.size]
    s1 = tab.s1_hi[: tab.size + 1]
    m = np.searchsorted(s1, np.where(neg | beyond, 0.0, u_hi), side="right") - 1
    m = np.clip(m, 0, max(tab.size - 1, 0))
    for _ in range(2):
        d = dd_diff(u_hi, u_lo, tab.s1_hi[m], tab.s1_lo[m])
        m = np.where((d < 0) & (m > 0) & ~neg & ~beyond, m - 1, m)
    w_m = spec.w(m)
    theta = dd_diff(u_hi, u_lo, tab.s1_hi[m], tab.s1_lo[m]) * w_m
    over = (theta >= 1.0) & (m + 1 < tab.size)
    if np.any(over):
        m = np.where(over, m + 1, m)
        theta = np.where(over, dd_diff(u_hi, u_lo, tab.s1_hi[m], tab.s1_lo[m]) * spec.w(m), theta)
    theta = np.clip(theta, 0.0, np.nextafter(1.0, 0.0))
    m = np.where(neg, 0, m)
    theta = np.where(neg, 0.0, theta)
    # u == S1[size] exactly sits on the table edge and stays exact
    edge = beyond & (u_hi <= tab.s1_hi[tab.size])
    beyond = beyond & ~edge
    y_tail = np.zeros(u_hi.shape)
    if np.any(beyond):
        tail = tab.tail
        if tail is None:
            raise _no_tail(tab, f"W^-1({float(np.max(u_hi))})")
        excess = dd_diff(u_hi[beyond], u_lo[beyond], tab.s1_hi[tab.cap], tab.s1_lo[tab.cap])
        y_tail[beyond] = tail.inv_g1(excess)
        m = np.where(beyond, -1, m)
        theta = np.where(beyond, 0.0, theta)
    return m, theta, y_tail


def _as_value(m, theta, y_tail):
    return np.where(m >= 0, m + theta, y_tail)


def eval_w(spec, n):
    """w(n) for a nonnegative integer ``n``."""
    if np.any(np.asarray(n) < 0) or np.any(np.asarray(n) != np.floor(n)):
        raise DomainError("n must be a nonnegative integer")
    return spec.w(n)


def eval_W(spec, t):
    """W(t) = int_0^t du / w(floor(u))."""
    hi, lo, _ = W_dd(spec, t)
    out = hi + lo
    return float(out) if np.ndim(t) == 0 else out


def inv_W(spec, u):
    """Inverse of W, with W^-1(u) = 0 for u < 0 and +inf past a bounded W."""
    m, theta, y = locate(spec, u)
    out = _as_value(m, theta, y)
    return float(out) if np.ndim(u) == 0 else out


def W_limit(spec):
    """sup W = sum 1/w(n); +inf when the series diverges within float range."""
    tab = table_for(spec)
    tail = tab.tail
    if tail is None:
        return float(tab.s1_hi[tab.size] + tab.s1_lo[tab.size])
    while not tail.complete:
        tail._extend()
    if tail.knots[-1] * tail.ratio <= tail.t_max:
        return float(tab.s1_hi[tab.cap] + tail.g1[-1])
    return math.inf


# H and H^-1 ----------------------------------------------------------------------------

def eval_H(spec, x):
    """H(x) = x + W^-1(W(x) + 1)."""
    xa = np.asarray(x, dtype=np.float64)
    hi, lo, _ = W_dd(spec, xa)
    hi, lo = dd_add(hi, lo, 1.0, 0.0)
    m, theta, y = locate(spec, hi, lo)
    out = np.where(m >= 0, (xa + m) + theta, xa + y)
    return float(out) if np.ndim(x) == 0 else out


def _w_real(spec, t, tab):
    """w(floor t) inside the table, the midpoint surrogate past it."""
    t = np.asarray(t, dtype=np.float64)
    inside = t < tab.size
    out = np.empty(t.shape)
    out[inside] = spec.w(np.floor(t[inside]).astype(np.int64))
    if np.any(~inside):
        out[~inside] = spec.w_cont(t[~inside] - 0.5)
    return out


def inv_H(spec, y, rtol=1e-12):
    """Solve H(x) = y for y >= H(0).

    Bracketed Newton: H(x) >= 2x gives the bracket [0, y/2] and
    H'(x) = 1 + w(W^-1(W(x)+1)) / w(x) the step; any step leaving the bracket
    falls back to bisection.
    """
    ya = np.atleast_1d(np.asarray(y, dtype=np.float64))
    h0 = eval_H(spec, 0.0)
    if np.any(ya < h0):
        raise DomainError(f"H^-1 is defined on [H(0), inf) = [{h0}, inf)")
    tab = table_for(spec)
    lo = np.zeros(ya.shape)
    hi = 0.5 * ya
    x = 0.5 * (lo + hi)
    tol = rtol * np.maximum(ya, 1.0)
    active = np.ones(ya.shape, dtype=bool)
    for _ in range(200):
        xa = x[active]
        h = np.atleast_1d(eval_H(spec, xa))
        f = h - ya[active]
        below = f <= 0
        lo[active] = np.where(below, xa, lo[active])
        hi[active] = np.where(below, hi[active], xa)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            slope = 1.0 + _w_real(spec, h - xa, tab) / _w_real(spec, xa, tab)
            nxt = xa - f / slope
        bad = ~np.isfinite(nxt) | (nxt <= lo[active]) | (nxt >= hi[active])
        nxt = np.where(bad, 0.5 * (lo[active] + hi[active]), nxt)
        done = (np.abs(nxt - xa) <= tol[active]) | (hi[active] - lo[active] <= tol[active]) | (f == 0)
        x[active] = np.where(f == 0, xa, nxt)
        idx = np.flatnonzero(active)
        active[idx[done]] = False
        if not active.any():
            break
    return float(x[0]) if np.ndim(y) == 0 else x


# series --------------------------------------------------------------------------------

def partial_sums(spec, cutoffs, power=1):
    """sum_{k<N} 1/w(k)**power at each cutoff N (exact in the table, smooth tail past it)."""
    tab = table_for(spec)
    cutoffs = np.asarray(cutoffs, dtype=np.float64)
    tab.grow(min(int(np.max(cutoffs)), tab.cap))
    hi_arr = tab.s1_hi if power == 1 else tab.s2_hi
    lo_arr = tab.s1_lo if power == 1 else tab.s2_lo
    out = np.empty(cutoffs.shape)
    inside = cutoffs <= tab.size
    idx = cutoffs[inside].astype(np.int64)
    out[inside] = hi_arr[idx] + lo_arr[idx]
    if np.any(~inside):
        tail = tab.tail
        if tail is None:
            raise _no_tail(tab, f"N={float(np.max(cutoffs))}")
        base = hi_arr[tab.cap] + lo_arr[tab.cap]
        # sum_{k=cap}^{N-1} f(k) ~ int_{cap}^{N} f(s - 1/2) ds  (midpoint rule)
        out[~inside] = base + tail.g(cutoffs[~inside], power)
    return out


def series_tests(spec, exponents=range(1, 10), margin=0.15):
    """Classify sum 1/w(n) and sum 1/w(n)**2 from partial sums at n = 10**k."""
    from .criticals import classify_tail

    cutoffs = 10.0 ** np.asarray(list(exponents), dtype=np.float64)
    n = cutoffs.astype(np.int64)
    summand = 1.0 / spec.w(n)
    out = {}
    for name, p in (("recip", 1), ("recip_sq", 2)):
        partials = partial_sums(spec, cutoffs, p)
        out[name] = classify_tail(cutoffs, partials, summand ** p, margin=margin)
    return out


__all__ = [
    "WeightSpec", "PrefixTable", "table_for", "clear_tables", "load_tabulated",
    "eval_w", "eval_W", "inv_W", "eval_H", "inv_H", "W_limit", "series_tests",
    "partial_sums", "W_dd", "locate",
    "WeightError", "OutOfDomainError", "DomainError", "ResourceLimitError",
    "DEFAULT_CAP", "two_sum",
]
