"""Hot loops for value iteration, with a numpy fallback when numba is absent.

Both backends perform identical IEEE arithmetic in identical order, so the
iterates are bit-for-bit equal (verified in the test suite). The compressed
layout keeps, per node, only the controlling player's actions: a sweep
evaluates each action's one-stage value and takes max (sense +1) or min
(sense -1).
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn
        if args and callable(args[0]):
            return args[0]
        return wrap


@njit(cache=True)
def _vi_loop(gpay, sense, node_ptr, eptr, eprob, enxt, lam, stop_step,
             max_sweeps, f, buf):
    n_nodes = sense.shape[0]
    oml = 1.0 - lam
    step = np.inf
    sweeps = 0
    cur = f
    nxt = buf
    while sweeps < max_sweeps:
        step = 0.0
        for nd in range(n_nodes):
            sel = 0.0
            first = True
            for ai in range(node_ptr[nd], node_ptr[nd + 1]):
                s = 0.0
                for e in range(eptr[ai], eptr[ai + 1]):
                    s += eprob[e] * cur[enxt[e]]
                v = lam * gpay[ai] + oml * s
                if first:
                    sel = v
                    first = False
                elif sense[nd] > 0:
                    if v > sel:
                        sel = v
                else:
                    if v < sel:
                        sel = v
            nxt[nd] = sel
            d = abs(sel - cur[nd])
            if d > step:
                step = d
        tmp = cur
        cur = nxt
        nxt = tmp
        sweeps += 1
        if step <= stop_step:
            break
    if sweeps % 2 == 1:
        for nd in range(n_nodes):
            f[nd] = buf[nd]  # cur aliased buf after an odd number of swaps
    return step, sweeps


def vi_iterate(gpay, sense, node_ptr, eptr, eprob, enxt, lam, stop_step,
               max_sweeps, f):
    """Run Jacobi sweeps in place on f; returns (last step, sweeps done)."""
    buf = np.empty_like(f)
    step, sweeps = _vi_loop(gpay, sense, node_ptr, eptr, eprob, enxt,
                            float(lam), float(stop_step), int(max_sweeps), f, buf)
    return float(step), int(sweeps)


def sweep_once_numpy(gpay, sense, node_ptr, eptr, eprob, enxt, lam, f):
    """One synchronized sweep, vectorized; arithmetic order matches _vi_loop."""
    cont = np.add.reduceat(eprob * f[enxt], eptr[:-1])
    cont[eptr[:-1] == eptr[1:]] = 0.0
    vals = lam * gpay + (1.0 - lam) * cont
    hi = np.maximum.reduceat(vals, node_ptr[:-1])
    lo = np.minimum.reduceat(vals, node_ptr[:-1])
    return np.where(sense > 0, hi, lo)
