"""Compiled inner loop of the walk.

The loop advances until it reaches ``n_stop`` or needs something from Python
(more uniforms, a wider local-time array, a longer weight table) and reports
which through its status code.  All state lives in arrays owned by the caller.
"""

from numba import njit

DONE = 0
NEED_UNIFORMS = 1
NEED_ROOM = 2
NEED_WEIGHTS = 3

# slots of the int64 ``ctl`` vector
POS, N, UPTR, LEFT, RIGHT, GAP, BOUNDED = range(7)


@njit(cache=True)
def _acc(s, c, i, x):
    # Neumaier update of s[i] + c[i] by x
    t = s[i] + x
    if abs(s[i]) >= abs(x):
        c[i] += (s[i] - t) + x
    else:
        c[i] += (x - t) + s[i]
    s[i] = t


@njit(cache=True)
def advance(ctl, n_stop, Z, wz, wtab, u, track, yp, yp_c, ym, ym_c, h, h_c, jr, jl):
    i = ctl[POS]
    n = ctl[N]
    p = ctl[UPTR]
    bounded = ctl[BOUNDED] != 0
    lb = ctl[LEFT]
    rb = ctl[RIGHT]
    gap = ctl[GAP]
    size = Z.size
    nw = wtab.size
    status = DONE
    while n < n_stop:
        if p >= u.size:
            status = NEED_UNIFORMS
            break
        if i < 2 or i > size - 3:
            status = NEED_ROOM
            break
        if Z[i - 1] + 1 >= nw or Z[i + 1] + 1 >= nw:
            status = NEED_WEIGHTS
            break
        r = u[p]
        p += 1
        if bounded and i == lb:
            right = True
        elif bounded and i == rb:
            right = False
        else:
            wl = wz[i - 1]
            wr = wz[i + 1]
            right = r * (wl + wr) < wr
        if right:
            j = i + 1
            if track[i]:
                _acc(yp, yp_c, i, 1.0 / wz[j])
            jr[i] += 1
            d = jr[i] - jl[i]
        else:
            j = i - 1
            if track[i]:
                _acc(ym, ym_c, i, 1.0 / wz[j])
            jl[j] += 1
            d = jr[j] - jl[j]
        if d < 0:
            d = -d
        if d > gap:
            gap = d
        Z[j] += 1
        wz[j] = wtab[Z[j]]
        if track[j]:
            if bounded and j == lb:
                pl = 0.0
            elif bounded and j == rb:
                pl = 1.0
            else:
                pl = wz[j - 1] / (wz[j - 1] + wz[j + 1])
            _acc(h, h_c, j, (2.0 * pl - 1.0) / wz[j])
        i = j
        n += 1
    ctl[POS] = i
    ctl[N] = n
    ctl[UPTR] = p
    ctl[GAP] = gap
    return status
