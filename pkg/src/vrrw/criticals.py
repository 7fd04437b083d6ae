"""Partial integrals I_alpha, J_beta, J~_beta, their tail classification and critical parameters.

Each integrand has the form ``g(a W(x) + b)`` where ``g(u)`` is a step function of
``u`` (``1/w(floor W^-1(u))``, or ``1/w(floor H^-1(W^-1(u)))`` for J~).  On an
x-cell ``[k, k+1)`` the argument ``u`` is linear in ``x`` with slope ``a/w(k)``, so

    int_k^{k+1} g(u(x)) dx = w(k)/a * (G(u(k+1)) - G(u(k))),    G(u) = int_0^u g.

``G`` is itself piecewise linear in ``u`` and is read off the prefix tables in
double-double arithmetic.  Cells are used up to ``x_cells`` (1e5 by default);
further out the integrand is integrated over x by Gauss-Legendre panels on a
geometric grid, which is flagged as approximate.
"""

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from ._numerics import cumsum_dd, dd_add, dd_diff, gl_integrate
from .weights import (DomainError, OutOfDomainError, W_dd, W_limit, eval_W, inv_H, inv_W, locate,
                      partial_sums, table_for)

X_CELLS = 10**5
DEFAULT_EXPONENTS = tuple(range(2, 10))
DEFAULT_MARGIN = 0.15
SATURATION_TOL = 0.02
PANEL_RATIO = 1.1

BETA_GRID = (0.0,) + tuple(s * 2.0**k for k in range(11) for s in (1, -1))
ALPHA_GRID = tuple(2.0**k for k in range(-4, 11))

KIND_SLOPE = {"I": 1.0, "J": 2.0, "J_tilde": 2.0}


class Verdict(str, Enum):
    FINITE = "Finite"
    DIVERGENT = "Divergent"
    INCONCLUSIVE = "Inconclusive"


class Parameter(str, Enum):
    ALPHA_C = "AlphaC"
    BETA_C = "BetaC"
    BETA_TILDE_C = "BetaTildeC"


PARAMETER_KIND = {Parameter.ALPHA_C: "I", Parameter.BETA_C: "J", Parameter.BETA_TILDE_C: "J_tilde"}


@dataclass
class TailClassification:
    verdict: Verdict
    partials: list
    tail_slope: tuple          # (fit, lower, upper) over both decay signals
    slopes: list = field(default_factory=list)
    increment_exponents: list = field(default_factory=list)
    used_cutoffs: list = field(default_factory=list)
    approximate: bool = False
    note: str = ""

    def to_dict(self):
        return {
            "verdict": self.verdict.value,
            "partials": [[float(t), float(p)] for t, p in self.partials],
            "tail_slope": [_jsonable(v) for v in self.tail_slope],
            "slopes": [_jsonable(v) for v in self.slopes],
            "increment_exponents": [_jsonable(v) for v in self.increment_exponents],
            "used_cutoffs": [float(t) for t in self.used_cutoffs],
            "approximate": self.approximate,
            "note": self.note,
        }


@dataclass
class CriticalEstimate:
    parameter: Parameter
    verdict: str                # MinusInfinity | PlusInfinity | FiniteBracket | Unknown
    bracket: tuple | None
    probes: list
    notes: list = field(default_factory=list)

    @property
    def rank(self):
        """Position on the extended line used for ordering verdicts (None if Unknown)."""
        return {"MinusInfinity": -math.inf, "PlusInfinity": math.inf}.get(
            self.verdict, None if self.bracket is None else self.bracket[0])

    def to_dict(self):
        return {
            "parameter": self.parameter.value,
            "verdict": self.verdict,
            "bracket": None if self.bracket is None else list(self.bracket),
            "probes": [{"value": v, **c.to_dict()} for v, c in self.probes],
            "notes": list(self.notes),
        }


def _jsonable(v):
    v = float(v)
    if math.isnan(v):
        return None
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return v


# antiderivatives G(u) ----------------------------------------------------------------

def _G_plain(spec, u_hi, u_lo):
    """G(u) = int_0^u dv / w(floor W^-1(v)); returns (hi, lo, in_table)."""
    tab = table_for(spec)
    m, _, y = locate(spec, u_hi, u_lo, tab)
    neg = u_hi < 0
    mm = np.maximum(m, 0)
    d = dd_diff(u_hi, u_lo, tab.s1_hi[mm], tab.s1_lo[mm]) / spec.w(mm)
    hi, lo = dd_add(tab.s2_hi[mm], tab.s2_lo[mm], d, 0.0)
    w0 = spec.w(0)
    hi = np.where(neg, u_hi / w0, hi)
    lo = np.where(neg, u_lo / w0, lo)
    beyond = m < 0
    if np.any(beyond):
        bh, bl = dd_add(tab.s2_hi[tab.cap], tab.s2_lo[tab.cap], tab.tail.g(y[beyond], 2), 0.0)
        hi[beyond] = bh
        lo[beyond] = bl
    return hi, lo, ~beyond


@dataclass
class _HKnots:
    """Knots K[m] = W(H(m)) (K[0] = 0) and G at the knots, for the J~ integrand."""
    k_hi: np.ndarray
    k_lo: np.ndarray
    g_hi: np.ndarray
    g_lo: np.ndarray
    w: np.ndarray             # 1/slope on [K[m], K[m+1]); inf past a terminal knot
    terminal: bool            # True when H jumps to +inf (bounded W): G is constant past the last knot

    @property
    def top(self):
        return math.inf if self.terminal else float(self.k_hi[-1])


_KNOTS = {}


def _h_knots(spec):
    key = spec
    if key in _KNOTS:
        return _KNOTS[key]
    tab = table_for(spec)
    tab.grow(tab.cap)
    size = tab.size
    # only knots whose H(m) can land in the table, plus one to detect a jump to +inf
    n_in = int(np.searchsorted(tab.s1_hi[: size + 1], tab.s1_hi[size] - 1.0, side="right"))
    m = np.arange(1, min(max(n_in, 1) + 1, size))
    u_hi, u_lo = dd_add(tab.s1_hi[m], tab.s1_lo[m], 1.0, 0.0)
    mv, theta, y = locate(spec, u_hi, u_lo, tab)
    target = m + mv
    ok = (mv >= 0) & (target < size)
    n_ok = int(np.argmin(ok)) if not ok.all() else ok.size
    terminal = n_ok < ok.size and mv[n_ok] < 0 and np.isinf(y[n_ok])
    m = m[:n_ok]
    t = target[:n_ok]
    kh, kl = dd_add(tab.s1_hi[t], tab.s1_lo[t], theta[:n_ok] / spec.w(t), 0.0)
    k_hi = np.concatenate(([0.0], kh))
    k_lo = np.concatenate(([0.0], kl))
    wk = spec.w(np.arange(k_hi.size))
    if terminal:
        k_hi = np.append(k_hi, W_limit(spec))
        k_lo = np.append(k_lo, 0.0)
        wk = np.append(wk[:-1], [wk[-1], math.inf])
    widths = dd_diff(k_hi[1:], k_lo[1:], k_hi[:-1], k_lo[:-1])
    g_hi, g_lo = cumsum_dd(widths / wk[:widths.size])
    g_hi = np.concatenate(([0.0], g_hi))
    g_lo = np.concatenate(([0.0], g_lo))
    knots = _HKnots(k_hi, k_lo, g_hi, g_lo, wk, bool(terminal))
    if len(_KNOTS) > 8:
        _KNOTS.clear()
    _KNOTS[key] = knots
    return knots


def _G_tilde(spec, u_hi, u_lo):
    kn = _h_knots(spec)
    last = kn.k_hi.size - 1
    j = np.clip(np.searchsorted(kn.k_hi, u_hi, side="right") - 1, 0, last)
    d = dd_diff(u_hi, u_lo, kn.k_hi[j], kn.k_lo[j])
    back = (d < 0) & (j > 0)
    j = np.where(back, j - 1, j)
    d = np.where(back, dd_diff(u_hi, u_lo, kn.k_hi[j], kn.k_lo[j]), d)
    with np.errstate(invalid="ignore"):
        step = np.where(np.isinf(kn.w[j]), 0.0, d / kn.w[j])
    hi, lo = dd_add(kn.g_hi[j], kn.g_lo[j], step, 0.0)
    inside = kn.terminal | (u_hi <= kn.k_hi[-1])
    return hi, lo, inside


# pointwise integrands -------------------------------------------------------------------

def _g_plain(spec, u):
    tab = table_for(spec)
    m, _, y = locate(spec, u, 0.0, tab)
    mm = np.maximum(m, 0)
    out = np.array(1.0 / spec.w(mm), dtype=np.float64)
    beyond = m < 0
    if np.any(beyond):
        out[beyond] = tab.tail.recip(y[beyond] - 0.5)
    return out


def _g_tilde(spec, u):
    kn = _h_knots(spec)
    u = np.asarray(u, dtype=np.float64)
    inside = kn.terminal | (u <= kn.k_hi[-1])
    j = np.clip(np.searchsorted(kn.k_hi, u, side="right") - 1, 0, kn.k_hi.size - 1)
    out = 1.0 / kn.w[j]
    far = ~inside
    if np.any(far):
        tab = table_for(spec)
        y = inv_W(spec, u[far])
        r = np.zeros(y.shape)
        fin = np.isfinite(y)
        if np.any(fin):
            h = inv_H(spec, y[fin], rtol=1e-10)
            in_tab = h < tab.size
            vals = np.empty(h.shape)
            vals[in_tab] = 1.0 / spec.w(np.floor(h[in_tab]).astype(np.int64))
            if np.any(~in_tab):
                vals[~in_tab] = tab.tail.recip(h[~in_tab] - 0.5)
            r[fin] = vals
        out = out.copy()
        out[far] = r
    return out


def _shape(kind, param):
    if kind == "I":
        if not param > 0:
            raise DomainError("alpha must be positive")
        return 1.0, float(param)
    if kind in ("J", "J_tilde"):
        return 2.0, float(param)
    raise ValueError(f"unknown integral {kind!r}")


def integrand(spec, kind, param, x):
    """The integrand of I_alpha / J_beta / J~_beta at points x >= 0."""
    a, b = _shape(kind, param)
    hi, lo, _ = W_dd(spec, np.asarray(x, dtype=np.float64))
    u = a * hi + b + a * lo
    return _g_tilde(spec, u) if kind == "J_tilde" else _g_plain(spec, u)


# partial integrals ----------------------------------------------------------------------

@dataclass
class PartialResult:
    cutoffs: np.ndarray
    values: np.ndarray
    integrand: np.ndarray
    exact: np.ndarray


def integrate(spec, kind, param, cutoffs, x_cells=X_CELLS):
    """Partial integrals int_0^T for every T in ``cutoffs`` (one nested sweep)."""
    a, b = _shape(kind, param)
    cutoffs = np.atleast_1d(np.asarray(cutoffs, dtype=np.float64))
    if np.any(cutoffs <= 0):
        raise DomainError("cutoffs must be positive")
    tab = table_for(spec)
    G = _G_tilde if kind == "J_tilde" else _G_plain
    t_max = float(np.max(cutoffs))

    n_cells = int(min(math.floor(t_max), x_cells))
    tab.grow(n_cells + 1)
    k = np.arange(n_cells + 1)
    u_hi, u_lo = dd_add(a * tab.s1_hi[k], a * tab.s1_lo[k], b, 0.0)
    g_hi, g_lo, inside = G(spec, u_hi, u_lo)
    if kind == "J_tilde" and not np.all(inside):
        # cells stop where the knot table of H ends; quadrature takes over
        n_cells = max(int(np.argmin(inside)) - 1, 0)
        k, u_hi, g_hi, g_lo, inside = (arr[: n_cells + 1] for arr in (k, u_hi, g_hi, g_lo, inside))
    cell = (spec.w(k[:-1]) / a) * dd_diff(g_hi[1:], g_lo[1:], g_hi[:-1], g_lo[:-1])
    c_hi, c_lo = cumsum_dd(cell)
    cum_hi = np.concatenate(([0.0], c_hi))
    cum_lo = np.concatenate(([0.0], c_lo))
    cell_exact = np.concatenate(([True], np.logical_and.accumulate(inside[1:])))

    values = np.empty(cutoffs.shape)
    exact = np.empty(cutoffs.shape, dtype=bool)
    x_end = float(n_cells)
    in_cells = cutoffs <= x_end
    if np.any(in_cells):
        t = cutoffs[in_cells]
        kt = np.minimum(np.floor(t).astype(np.int64), max(n_cells - 1, 0))
        wt_hi, wt_lo, _ = W_dd(spec, t)
        ut_hi, ut_lo = dd_add(a * wt_hi, a * wt_lo, b, 0.0)
        gt_hi, gt_lo, ins_t = G(spec, ut_hi, ut_lo)
        part = (spec.w(kt) / a) * dd_diff(gt_hi, gt_lo, g_hi[kt], g_lo[kt])
        values[in_cells] = (cum_hi[kt] + part) + cum_lo[kt]
        exact[in_cells] = cell_exact[kt] & ins_t

    far = ~in_cells
    if np.any(far):
        base = cum_hi[-1] + cum_lo[-1]
        edges = _panel_edges(x_end, cutoffs[far])
        g = (lambda x: integrand(spec, kind, param, x.ravel()).reshape(x.shape))
        panel = gl_integrate(g, edges[:-1], edges[1:])
        cum = base + np.concatenate(([0.0], np.cumsum(panel)))
        values[far] = cum[np.searchsorted(edges, cutoffs[far])]
        exact[far] = False

    probe = integrand(spec, kind, param, cutoffs)
    return PartialResult(cutoffs, values, probe, exact)


def _panel_edges(x0, targets):
    top = float(np.max(targets))
    start = max(x0, 1.0)
    n = max(int(math.ceil(math.log(top / start) / math.log(PANEL_RATIO))), 1) if top > start else 0
    grid = start * PANEL_RATIO ** np.arange(1, n + 1)
    edges = np.unique(np.concatenate(([x0], grid[grid < top], targets)))
    return edges


def partial_I(spec, alpha, T):
    """int_0^T dx / w(W^-1(W(x) + alpha))."""
    return float(integrate(spec, "I", alpha, [T]).values[0])


def partial_J(spec, beta, T):
    """int_0^T dx / w(W^-1(2 W(x) + beta))."""
    return float(integrate(spec, "J", beta, [T]).values[0])


def partial_J_tilde(spec, beta, T):
    """int_0^T dx / w(H^-1(W^-1(2 W(x) + beta)))."""
    return float(integrate(spec, "J_tilde", beta, [T]).values[0])


# classification ---------------------------------------------------------------------------

def classify_tail(cutoffs, partials, integrand_probe, margin=DEFAULT_MARGIN,
                  admissible=None, window=5, min_cutoffs=4, approximate=False):
    """Decide whether an improper integral (or series) is finite from its partial sums.

    Two decay signals are read off the last ``window`` admissible cutoffs: the
    log-log slope of the integrand between consecutive cutoffs and the exponent
    implied by successive increments of the partial values.  Both are exponents
    ``s`` of an ``x**-s`` tail.
    """
    cutoffs = np.asarray(cutoffs, dtype=np.float64)
    partials = np.asarray(partials, dtype=np.float64)
    probe = np.asarray(integrand_probe, dtype=np.float64)
    trace = list(zip(cutoffs.tolist(), partials.tolist()))
    mask = np.ones(cutoffs.shape, bool) if admissible is None else np.asarray(admissible, bool)
    idx = np.flatnonzero(mask)[-window:]
    if idx.size < min_cutoffs:
        return TailClassification(Verdict.INCONCLUSIVE, trace, (math.nan,) * 3,
                                  used_cutoffs=cutoffs[idx].tolist(), approximate=approximate,
                                  note=f"only {idx.size} admissible cutoffs")
    t, p, f = cutoffs[idx], partials[idx], probe[idx]
    logt = np.log10(t)
    with np.errstate(divide="ignore", invalid="ignore"):
        slopes = -np.diff(np.log10(f)) / np.diff(logt)
        inc = np.diff(p)
        expo = 1.0 - np.diff(np.log10(inc)) / np.diff(logt)[1:]
    slopes = np.where(np.isnan(slopes), math.inf, slopes)
    expo = np.where(np.isnan(expo), math.inf, expo)
    signals = np.concatenate((slopes, expo))
    lo, hi = float(np.min(signals)), float(np.max(signals))
    pos = f > 0
    if np.count_nonzero(pos) >= 2:
        fit = -np.polyfit(logt[pos], np.log10(f[pos]), 1)[0]
    else:
        fit = math.inf
    vanished = f[-1] == 0 and f[-2] == 0
    if vanished or lo > 1 + margin:
        verdict, note = Verdict.FINITE, "integrand vanishes" if vanished else ""
    elif hi < 1 - margin:
        verdict, note = Verdict.DIVERGENT, ""
    elif np.all(expo <= 1 + SATURATION_TOL) and np.all(slopes <= 1 + margin):
        verdict, note = Verdict.DIVERGENT, "increments do not shrink faster than 1/x"
    else:
        verdict, note = Verdict.INCONCLUSIVE, "decay exponent straddles 1"
    return TailClassification(verdict, trace, (fit, lo, hi), slopes.tolist(), expo.tolist(),
                              t.tolist(), approximate, note)


def classify_integral(spec, kind, param, exponents=DEFAULT_EXPONENTS, margin=DEFAULT_MARGIN,
                      x_cells=X_CELLS):
    cutoffs = 10.0 ** np.asarray(exponents, dtype=np.float64)
    try:
        res = integrate(spec, kind, param, cutoffs, x_cells=x_cells)
    except (OutOfDomainError, DomainError) as exc:
        return TailClassification(Verdict.INCONCLUSIVE, [], (math.nan,) * 3, note=str(exc))
    # below W(T) ~ |param| the shift dominates and the integrand is not yet in its tail;
    # a bounded W never gets there, and its integrands settle as soon as W does
    admissible = eval_W(spec, cutoffs) >= abs(param)
    if math.isfinite(W_limit(spec)):
        admissible[:] = True
    return classify_tail(cutoffs, res.values, res.integrand, margin=margin,
                         admissible=admissible, approximate=not bool(np.all(res.exact)))


def estimate_critical(spec, parameter, grid=None, exponents=DEFAULT_EXPONENTS,
                      margin=DEFAULT_MARGIN, x_cells=X_CELLS):
    """Bracket alpha_c, beta_c or beta~_c from classifications on a probe grid."""
    parameter = Parameter(parameter)
    kind = PARAMETER_KIND[parameter]
    if grid is None:
        grid = ALPHA_GRID if parameter is Parameter.ALPHA_C else BETA_GRID
    grid = sorted(float(v) for v in grid)
    probes = [(v, classify_integral(spec, kind, v, exponents, margin, x_cells)) for v in grid]
    return _combine(parameter, probes)


def _combine(parameter, probes):
    conclusive = [(v, c.verdict) for v, c in probes if c.verdict is not Verdict.INCONCLUSIVE]
    notes = []
    finite = [v for v, verdict in conclusive if verdict is Verdict.FINITE]
    divergent = [v for v, verdict in conclusive if verdict is Verdict.DIVERGENT]
    if finite and divergent and max(divergent) > min(finite):
        bad = [v for v in divergent if v > min(finite)]
        notes.append(f"monotonicity violated: Divergent at {bad} above Finite at {min(finite)}")
    if not conclusive:
        return CriticalEstimate(parameter, "Unknown", None, probes, ["all probes inconclusive"])
    if not finite:
        return CriticalEstimate(parameter, "PlusInfinity", None, probes, notes)
    lowest = conclusive[0]
    if lowest[1] is Verdict.FINITE:
        if parameter is Parameter.ALPHA_C:
            return CriticalEstimate(parameter, "FiniteBracket", (0.0, lowest[0]), probes,
                                    notes + ["finite at the smallest probed alpha"])
        return CriticalEstimate(parameter, "MinusInfinity", None, probes, notes)
    hi = min(finite)
    lo = max(v for v in divergent if v < hi)
    return CriticalEstimate(parameter, "FiniteBracket", (lo, hi), probes, notes)


def consistency_gate(beta_c, beta_tilde_c, series):
    """Cross-checks between verdicts that must hold for any weight; returns violations."""
    problems = []
    r, rt = beta_c.rank, beta_tilde_c.rank
    if r is not None and rt is not None and rt < r:
        problems.append(f"beta~_c verdict {beta_tilde_c.verdict} lies below beta_c verdict {beta_c.verdict}")
    if beta_c.verdict in ("MinusInfinity", "FiniteBracket"):
        if series["recip_sq"].verdict is not Verdict.FINITE:
            problems.append(f"beta_c is {beta_c.verdict} but sum 1/w^2 is "
                            f"{series['recip_sq'].verdict.value}")
    return problems


# structural laws ----------------------------------------------------------------------------

def check_scaling(spec, lam, beta, T):
    """|J_beta(lam w) - J_{lam beta}(w)/lam| at cutoff T (an exact identity)."""
    lhs = partial_J(spec.scaled(lam), beta, T)
    rhs = partial_J(spec, lam * beta, T) / lam
    return abs(lhs - rhs)


@dataclass
class ConditionCheck:
    verdict: str               # bounded | unbounded | inconclusive
    ratios: dict
    slopes: dict


def _ratio_verdict(ratios, lo_tol=0.05, hi_tol=0.15, tail=4):
    slopes = {}
    verdicts = []
    for key, r in ratios.items():
        r = np.asarray(r, dtype=np.float64)
        if not np.all(np.isfinite(r)):
            slopes[key] = [math.inf]
            verdicts.append("unbounded")
            continue
        s = np.diff(np.log10(r))[-tail:]
        slopes[key] = s.tolist()
        if np.max(np.abs(s)) < lo_tol:
            verdicts.append("bounded")
        elif np.min(s) > hi_tol:
            verdicts.append("unbounded")
        else:
            verdicts.append("inconclusive")
    if "unbounded" in verdicts:
        verdict = "unbounded"
    elif all(v == "bounded" for v in verdicts):
        verdict = "bounded"
    else:
        verdict = "inconclusive"
    return verdict, slopes


def check_sublinear_conditions(spec, exponents=range(1, 10), alphas=(0.5, 1.0, 2.0),
                               factors=(2, 4, 8)):
    """Probe limsup W^-1(W(n)+alpha)/n < inf and limsup w(cn)/w(n) < inf on n = 10**k."""
    n = 10.0 ** np.asarray(list(exponents), dtype=np.float64)
    r13 = {a: inv_W(spec, eval_W(spec, n) + a) / n for a in alphas}
    ni = n.astype(np.int64)
    r14 = {c: spec.w(c * ni) / spec.w(ni) for c in factors}
    v13, s13 = _ratio_verdict(r13)
    v14, s14 = _ratio_verdict(r14)
    return {
        "cond_13": ConditionCheck(v13, {k: v.tolist() for k, v in r13.items()}, s13),
        "cond_14": ConditionCheck(v14, {k: v.tolist() for k, v in r14.items()}, s14),
    }


__all__ = [
    "Verdict", "Parameter", "TailClassification", "CriticalEstimate", "PartialResult",
    "integrate", "integrand", "partial_I", "partial_J", "partial_J_tilde", "classify_tail",
    "classify_integral", "estimate_critical", "consistency_gate", "check_scaling",
    "check_sublinear_conditions", "ConditionCheck", "partial_sums",
]
