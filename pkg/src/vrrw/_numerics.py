"""Low-level numeric helpers: error-free sums and compensated prefix sums."""

import numpy as np
from numba import njit

GL_NODES, GL_WEIGHTS = np.polynomial.legendre.leggauss(16)


def two_sum(a, b):
    """Error-free transformation: a + b == s + e exactly."""
    s = a + b
    bb = s - a
    e = (a - (s - bb)) + (b - bb)
    return s, e


def dd_add(ah, al, bh, bl):
    """Add two double-double numbers, returning a normalized (hi, lo) pair."""
    s, e = two_sum(ah, bh)
    e = e + (al + bl)
    hi = s + e
    lo = e - (hi - s)
    return hi, lo


def dd_diff(ah, al, bh, bl):
    """(ah + al) - (bh + bl) rounded once to double."""
    s, e = two_sum(ah, -bh)
    return s + (e + (al - bl))


@njit(cache=True)
def compensated_cumsum(terms, start_hi, start_lo, out_hi, out_lo):
    """Neumaier running sum of ``terms`` starting from ``start_hi + start_lo``.

    ``out_hi[i] + out_lo[i]`` holds the sum of the start value and terms[:i+1].
    """
    s = start_hi
    c = start_lo
    for i in range(terms.size):
        x = terms[i]
        t = s + x
        if abs(s) >= abs(x):
            c += (s - t) + x
        else:
            c += (x - t) + s
        s = t
        hi = s + c
        out_hi[i] = hi
        out_lo[i] = c - (hi - s)


def cumsum_dd(terms, start_hi=0.0, start_lo=0.0):
    terms = np.ascontiguousarray(terms, dtype=np.float64)
    hi = np.empty_like(terms)
    lo = np.empty_like(terms)
    compensated_cumsum(terms, float(start_hi), float(start_lo), hi, lo)
    return hi, lo


def gl_integrate(f, a, b):
    """16-point Gauss-Legendre integral of a vectorized ``f`` over [a, b] (elementwise)."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    x = mid[..., None] + half[..., None] * GL_NODES
    return half * np.sum(GL_WEIGHTS * f(x), axis=-1)
