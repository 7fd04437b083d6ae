"""Independent brute-force reference values for the partial integrals.

Nothing here reuses the prefix tables, double-double helpers or cell formulas of
the main code path.  The integrand is evaluated pointwise from a long-double
cumulative sum and integrated by a Riemann sum with step ``h``.  Because every
integrand is nonincreasing in x, a step cell whose two endpoint values agree is
constant, and only cells straddling a jump are split further (by bisection,
``depth`` levels).  A plain Riemann sum would carry an error of order
``h * (total variation)``, far above the agreement levels we test.
"""

import numpy as np


class RiemannOracle:
    def __init__(self, w, size=2**22, w_inf=None):
        """``w`` maps an integer array to weights; ``w_inf`` is sum 1/w when finite."""
        n = np.arange(size, dtype=np.int64)
        self.w = np.asarray(w(n), dtype=np.float64)
        recip = 1.0 / self.w.astype(np.longdouble)
        self.S1 = np.concatenate(([0.0], np.cumsum(recip).astype(np.float64)))
        self.size = size
        self.w_inf = w_inf
        # H at integer points, as far as the table reaches
        top = self.S1[-1]
        heads = self.S1[:-1] + 1.0
        ok = heads < top
        m = np.flatnonzero(ok)
        Hk = m + self._winv(heads[ok])
        keep = Hk < size
        self.Hk = Hk[keep]
        self.h_complete = bool(w_inf is not None and not ok[1:].any())

    def _winv(self, u):
        j = np.searchsorted(self.S1, u, side="right") - 1
        j = np.clip(j, 0, self.size - 1)
        return j + (u - self.S1[j]) * self.w[j]

    def W(self, x):
        m = np.floor(x).astype(np.int64)
        return self.S1[m] + (x - m) / self.w[m]

    def _floor_winv(self, u):
        """floor(W^-1(u)); -1 where u lies past the table (bounded W: past or at W_inf)."""
        j = np.searchsorted(self.S1, u, side="right") - 1
        j = np.where(u < 0, 0, j)
        past = u >= self.S1[-1]
        if np.any(past) and self.w_inf is None:
            raise ValueError("oracle table too small for this cutoff")
        return np.where(past, -1, j)

    def integrand(self, kind, param, x):
        if kind == "I":
            u = self.W(x) + param
        else:
            u = 2.0 * self.W(x) + param
        y = self._floor_winv(u)
        out = np.zeros(x.shape)
        fin = y >= 0
        if kind == "J_tilde":
            # floor(H^-1(Y)) = number of H knots <= Y, minus one (0 below H(0))
            yr = np.where(u[fin] < 0, 0.0, self._winv(u[fin]))
            m = np.searchsorted(self.Hk, yr, side="right") - 1
            m = np.maximum(m, 0)
            if not self.h_complete and np.any(m >= self.Hk.size - 1):
                raise ValueError("oracle H table too small for this cutoff")
            out[fin] = 1.0 / self.w[m]
            if self.w_inf is not None:
                # W^-1(u) is finite (beyond the table) while u < W_inf; H^-1 of it is
                # still inside the last finite knot interval
                near = (~fin) & (u < self.w_inf)
                out[near] = 1.0 / self.w[self.Hk.size - 1]
        else:
            out[fin] = 1.0 / self.w[y[fin]]
        return out

    def integrate(self, kind, param, T, h=1e-4, depth=34, chunk=2**20):
        n = int(round(T / h))
        total = 0.0
        for start in range(0, n, chunk):
            i = np.arange(start, min(start + chunk, n) + 1, dtype=np.float64)
            x = np.minimum(i * h, T)
            f = self.integrand(kind, param, x)
            a, b, fa, fb = x[:-1], x[1:], f[:-1], f[1:]
            same = fa == fb
            total += float(np.sum((b - a)[same] * fa[same]))
            a, b, fa, fb = a[~same], b[~same], fa[~same], fb[~same]
            for _ in range(depth):
                if a.size == 0:
                    break
                mid = 0.5 * (a + b)
                fm = self.integrand(kind, param, mid)
                a = np.concatenate((a, mid))
                b = np.concatenate((mid, b))
                fl = np.concatenate((fa, fm))
                fr = np.concatenate((fm, fb))
                same = fl == fr
                total += float(np.sum((b - a)[same] * fl[same]))
                a, b, fa, fb = a[~same], b[~same], fl[~same], fr[~same]
            total += float(np.sum((b - a) * 0.5 * (fa + fb)))
        return total


def family_oracle(spec, size=None):
    """Oracle for a closed-form family (uses only the family's formula)."""
    w_inf = None
    bounded = spec.family == "power" and spec.param > 1
    if size is None:
        # with a summable 1/w the truncated tail only costs O(size**-3)
        size = 2**16 if bounded else 2**22
    if bounded:
        # sum_{n>=N} (n+1)^-rho ~ int_{N+1/2}^inf t^-rho dt
        n = np.arange(size, dtype=np.float64)
        head = float(np.sum(1.0 / ((n + 1.0) ** spec.param * spec.scale)))
        tail = (size + 0.5) ** (1.0 - spec.param) / (spec.param - 1.0) / spec.scale
        w_inf = head + tail
    return RiemannOracle(spec.w, size=size, w_inf=w_inf)
