import numpy as np
import pytest

from aerokin import _fallback, kernels

compiled = pytest.importorskip("aerokin._core")


def data(n=1000, seed=0):
    rng = np.random.default_rng(seed)
    x = rng.random((n, 3))
    x[:5] = [[0.0, 0.0, 0.0], [0.999999999, 0.5, 0.5], [0.125, 0.25, 0.875], [0.5, 0.0, 1 - 1e-17], [0.3, 0.3, 0.3]]
    x %= 1.0
    return x, rng.standard_normal((n, 3)), rng.random(n) + 0.5


def test_backend_reported():
    assert kernels.BACKEND in ("compiled", "python")


@pytest.mark.parametrize("n", [4, 16])
def test_deposit_parity(n):
    x, v, w = data()
    a = kernels.deposit(x, v, w, n, impl=compiled)
    b = kernels.deposit(x, v, w, n, impl=_fallback)
    np.testing.assert_allclose(a[0], b[0], rtol=1e-13, atol=1e-15)
    np.testing.assert_allclose(a[1], b[1], rtol=1e-13, atol=1e-14)


def test_gather_parity():
    x, _, _ = data()
    field = np.random.default_rng(1).standard_normal((3, 8 ** 3))
    a = kernels.gather(field, x, 8, impl=compiled)
    b = kernels.gather(field, x, 8, impl=_fallback)
    np.testing.assert_allclose(a, b, rtol=1e-13, atol=1e-14)


def test_drift_and_kick_parity():
    x, v, _ = data()
    xa, xb = x.copy(), x.copy()
    kernels.drift(xa, 3.7 * v, 0.3, impl=compiled)
    kernels.drift(xb, 3.7 * v, 0.3, impl=_fallback)
    np.testing.assert_array_equal(xa, xb)
    assert np.all((xa >= 0.0) & (xa < 1.0))
    u = np.ones_like(v)
    va, vb = v.copy(), v.copy()
    kernels.kick(va, u, np.exp(-0.1), impl=compiled)
    kernels.kick(vb, u, np.exp(-0.1), impl=_fallback)
    np.testing.assert_array_equal(va, vb)
    np.testing.assert_allclose(va - u, (v - u) * np.exp(-0.1), atol=4e-16)


@pytest.mark.parametrize("impl", [compiled, _fallback], ids=["compiled", "python"])
def test_threads_do_not_change_bits(impl):
    x, v, w = data(5001, 3)
    ref = kernels.deposit(x, v, w, 8, threads=1, impl=impl)
    field = np.random.default_rng(2).standard_normal((3, 8 ** 3))
    g_ref = kernels.gather(field, x, 8, threads=1, impl=impl)
    for threads in (2, 4, 8):
        out = kernels.deposit(x, v, w, 8, threads=threads, impl=impl)
        np.testing.assert_array_equal(out[0], ref[0])
        np.testing.assert_array_equal(out[1], ref[1])
        np.testing.assert_array_equal(kernels.gather(field, x, 8, threads=threads, impl=impl), g_ref)
