"""Smooth continuation of the reciprocal-weight integrals past the prefix table.

Beyond the last tabulated index the step function ``w(floor(t))`` is replaced
by the midpoint surrogate ``w(t - 1/2)``; the integrals of ``1/w`` and ``1/w**2``
are then accumulated on a geometric knot grid with Gauss-Legendre panels.
The surrogate agrees with the exact piecewise-linear primitive to second
order in ``1/t``.
"""

import numpy as np

from ._numerics import gl_integrate


class SmoothTail:
    """Integrals ``g_p(t) = int_{t0}^t ds / w(s)**p`` for ``p`` in {1, 2}, t >= t0."""

    def __init__(self, wfun, t0, ratio=1.02, t_max=1e300, chunk=256):
        self.wfun = wfun
        self.t0 = float(t0)
        self.ratio = ratio
        self.t_max = t_max
        self.chunk = chunk
        self.knots = np.array([self.t0])
        self.g1 = np.array([0.0])
        self.g2 = np.array([0.0])
        self.complete = False
        self._extend()

    def recip(self, t, p=1):
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            w = self.wfun(t)
            out = 1.0 / w ** p
        return np.where(np.isfinite(w), out, 0.0)

    def _extend(self):
        if self.complete:
            return
        last = self.knots[-1]
        new = last * self.ratio ** np.arange(1, self.chunk + 1)
        new = new[new <= self.t_max]
        if new.size == 0:
            self.complete = True
            return
        left = np.concatenate(([last], new[:-1]))
        inc1 = gl_integrate(lambda s: self.recip(s, 1), left, new)
        inc2 = gl_integrate(lambda s: self.recip(s, 2), left, new)
        self.knots = np.concatenate((self.knots, new))
        self.g1 = np.concatenate((self.g1, self.g1[-1] + np.cumsum(inc1)))
        self.g2 = np.concatenate((self.g2, self.g2[-1] + np.cumsum(inc2)))
        # remaining mass below double resolution: the integral has converged
        if inc1[-1] <= 1e-20 * max(1.0, self.g1[-1]):
            self.complete = True
        if new[-1] * self.ratio > self.t_max:
            self.complete = True

    def extend_to_t(self, t):
        while self.knots[-1] < t and not self.complete:
            self._extend()

    def extend_to_g1(self, g):
        while self.g1[-1] < g and not self.complete:
            self._extend()

    @property
    def g1_limit(self):
        """Value of g1 past which the inverse is reported as +inf (None if not reached)."""
        return self.g1[-1] if self.complete else None

    def g(self, t, p=1):
        t = np.asarray(t, dtype=np.float64)
        finite = np.isfinite(t)
        if np.any(finite):
            self.extend_to_t(np.max(t[finite]))
        gp = self.g1 if p == 1 else self.g2
        tt = np.where(finite, np.minimum(t, self.knots[-1]), self.knots[-1])
        j = np.clip(np.searchsorted(self.knots, tt, side="right") - 1, 0, self.knots.size - 1)
        out = gp[j] + gl_integrate(lambda s: self.recip(s, p), self.knots[j], tt)
        return np.where(t > self.knots[-1], gp[-1], out)

    def integral(self, a, b, p=1):
        """int_a^b ds / w(s)**p for tail points a <= b (short spans done directly)."""
        a = np.asarray(a, dtype=np.float64)
        b = np.asarray(b, dtype=np.float64)
        short = np.isfinite(b) & (b <= a * self.ratio)
        direct = gl_integrate(lambda s: self.recip(s, p), a, np.where(short, b, a))
        return np.where(short, direct, self.g(b, p) - self.g(a, p))

    def inv_g1(self, g):
        """Solve g1(t) = g; +inf when g is beyond the reachable range."""
        g = np.asarray(g, dtype=np.float64)
        if g.size:
            self.extend_to_g1(np.max(g))
        beyond = self.complete & (g >= self.g1[-1])
        gg = np.where(beyond, 0.0, np.maximum(g, 0.0))
        j = np.clip(np.searchsorted(self.g1, gg, side="right") - 1, 0, self.knots.size - 2)
        t_lo = self.knots[j]
        t_hi = self.knots[j + 1]
        span = self.g1[j + 1] - self.g1[j]
        frac = np.where(span > 0, (gg - self.g1[j]) / np.where(span > 0, span, 1.0), 0.0)
        t = t_lo + frac * (t_hi - t_lo)
        base = self.g1[j]
        for _ in range(8):
            r = base + gl_integrate(lambda s: self.recip(s, 1), t_lo, t) - gg
            with np.errstate(over="ignore", invalid="ignore"):
                t = np.clip(t - r * self.wfun(t), t_lo, t_hi)
        return np.where(beyond, np.inf, t)
