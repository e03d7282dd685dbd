"""Pure NumPy versions of the compiled particle kernels, same signatures."""

from __future__ import annotations

import numpy as np


def _corners(x: np.ndarray, n: int):
    s = x * n
    base = np.floor(s)
    frac = s - base
    lo = base.astype(np.int64) % n
    hi = (lo + 1) % n
    idx = (lo, hi)
    wts = (1.0 - frac, frac)
    for a in range(2):
        for b in range(2):
            for c in range(2):
                node = (idx[a][:, 0] * n + idx[b][:, 1]) * n + idx[c][:, 2]
                yield node, wts[a][:, 0] * wts[b][:, 1] * wts[c][:, 2]


def deposit_chunk(x, v, w, start, stop, n, rho, flux):
    if stop <= start:
        return
    xs, vs, ws = x[start:stop], v[start:stop], w[start:stop]
    size = n ** 3
    for node, share in _corners(xs, n):
        share = ws * share
        rho += np.bincount(node, weights=share, minlength=size)
        for k in range(3):
            flux[k] += np.bincount(node, weights=share * vs[:, k], minlength=size)


def gather_chunk(field, x, start, stop, n, out):
    if stop <= start:
        return
    acc = np.zeros((stop - start, field.shape[0]))
    for node, share in _corners(x[start:stop], n):
        acc += share[:, None] * field[:, node].T
    out[start:stop] = acc


def drift(x, v, dt):
    s = x + v * dt
    s -= np.floor(s)
    s[s >= 1.0] = 0.0
    x[...] = s


def kick(v, u, factor):
    v[...] = u + (v - u) * factor
