"""Particle kernel dispatch with deterministic chunked threading.

The compiled extension is used when it imports; otherwise the NumPy
fallback. Set AEROKIN_BACKEND=python to force the fallback.

Particles are split into a fixed number of contiguous chunks that does not
depend on the thread count. Each chunk deposits into its own buffer and the
buffers are summed in chunk order, so results are bit-identical for any
number of threads.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import _fallback

if os.environ.get("AEROKIN_BACKEND", "").lower() == "python":
    _impl = _fallback
    BACKEND = "python"
else:
    try:
        from . import _core as _impl
        BACKEND = "compiled"
    except ImportError:
        _impl = _fallback
        BACKEND = "python"

DEPOSIT_CHUNKS = 8


def _bounds(n_items: int, n_chunks: int) -> list[tuple[int, int]]:
    edges = np.linspace(0, n_items, n_chunks + 1).astype(int)
    return list(zip(edges[:-1], edges[1:]))


def _map(fn, bounds, threads: int):
    if threads <= 1:
        return [fn(b) for b in bounds]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, bounds))


def _contiguous(a) -> np.ndarray:
    return np.ascontiguousarray(a, dtype=np.float64)


def deposit(x, v, w, n: int, threads: int = 1, impl=None):
    """Cloud-in-cell sums of w and w v on the N^3 nodes (not yet divided by cell volume).

    Returns (mass (N^3,), flux (3, N^3)).
    """
    impl = impl or _impl
    x, v, w = _contiguous(x), _contiguous(v), _contiguous(w)

    def work(bound):
        rho = np.zeros(n ** 3)
        flux = np.zeros((3, n ** 3))
        impl.deposit_chunk(x, v, w, bound[0], bound[1], n, rho, flux)
        return rho, flux

    parts = _map(work, _bounds(len(w), DEPOSIT_CHUNKS), threads)
    rho, flux = parts[0]
    for r, f in parts[1:]:
        rho += r
        flux += f
    return rho, flux


def gather(field, x, n: int, threads: int = 1, impl=None) -> np.ndarray:
    """Trilinear values of field (c, N^3) at positions x (m, 3); returns (m, c)."""
    impl = impl or _impl
    field, x = _contiguous(field), _contiguous(x)
    out = np.zeros((len(x), field.shape[0]))

    def work(bound):
        impl.gather_chunk(field, x, bound[0], bound[1], n, out)

    _map(work, _bounds(len(x), DEPOSIT_CHUNKS), threads)
    return out


def drift(x: np.ndarray, v: np.ndarray, dt: float, impl=None) -> None:
    (impl or _impl).drift(x, _contiguous(v), float(dt))


def kick(v: np.ndarray, u: np.ndarray, factor: float, impl=None) -> None:
    (impl or _impl).kick(v, _contiguous(u), float(factor))
