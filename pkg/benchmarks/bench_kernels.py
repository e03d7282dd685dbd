"""Time the compiled particle kernels against the NumPy fallback.

    python benchmarks/bench_kernels.py [n_particles] [grid]
"""

import sys
import timeit

import numpy as np

from aerokin import _fallback, kernels


def main(n: int = 200_000, grid: int = 32, repeat: int = 5) -> None:
    rng = np.random.default_rng(0)
    x = rng.random((n, 3))
    v = rng.normal(size=(n, 3))
    w = np.full(n, 1.0 / n)
    field = rng.normal(size=(3, grid ** 3))
    backends = {"python": _fallback}
    if kernels.BACKEND == "compiled":
        backends["compiled"] = kernels._impl
    print(f"particles={n} grid={grid}^3 repeat={repeat} (best of, seconds)")
    results = {}
    for name, impl in backends.items():
        xs = x.copy()
        vs = v.copy()
        timings = {
            "deposit": lambda: kernels.deposit(x, v, w, grid, impl=impl),
            "gather": lambda: kernels.gather(field, x, grid, impl=impl),
            "drift": lambda: kernels.drift(xs, vs, 1e-3, impl=impl),
            "kick": lambda: kernels.kick(vs, v, 0.99, impl=impl),
        }
        results[name] = {k: min(timeit.repeat(fn, number=1, repeat=repeat))
                         for k, fn in timings.items()}
    for kernel in ("deposit", "gather", "drift", "kick"):
        line = f"{kernel:8s}" + "".join(f"  {name}={res[kernel]:.4f}" for name, res in results.items())
        if len(results) == 2:
            line += f"  speedup={results['python'][kernel] / results['compiled'][kernel]:.1f}x"
        print(line)
    if len(results) == 2:
        a = kernels.deposit(x, v, w, grid, impl=_fallback)
        b = kernels.deposit(x, v, w, grid)
        print(f"max deposit difference between backends: {np.max(np.abs(a[0] - b[0])):.3e}")


if __name__ == "__main__":
    args = [int(a) for a in sys.argv[1:3]]
    main(*args)
