"""Compare the compiled kernels with the NumPy fallback.

Run with ``python benchmarks/bench_kernels.py``.  Prints the best-of-N wall
time per call for each backend and the maximum absolute difference between
their results.
"""

import timeit

import numpy as np

from biphoton import _kernels_py

try:
    from biphoton import _kernels as _compiled
except ImportError:  # pragma: no cover
    _compiled = None


def _log_series_case(n_nodes=2000, order=6, seed=0):
    rng = np.random.default_rng(seed)
    C = rng.uniform(-0.1, 0.1, size=(n_nodes, 3, 3))
    C[:, 0, 0] = 1.0 + rng.uniform(0.0, 0.5, n_nodes)
    w = rng.uniform(0.0, 1.0, n_nodes)
    return (C, w, order, order)


def _cos_transform_case(rows=8, n_nodes=2000, n_x=64, seed=1):
    rng = np.random.default_rng(seed)
    v = rng.normal(size=(rows, n_nodes)) + 1j * rng.normal(size=(rows, n_nodes))
    k = np.linspace(-50.0, 50.0, n_nodes)
    w = np.full(n_nodes, k[1] - k[0])
    x = np.linspace(-5.0, 5.0, n_x)
    return (v, k, w, x)


def bench(name, args, repeat=5):
    out = {}
    results = {}
    impls = [("python", _kernels_py)]
    if _compiled is not None:
        impls.append(("cython", _compiled))
    for label, mod in impls:
        fn = getattr(mod, name)
        number = 3
        t = min(timeit.repeat(lambda: fn(*args), number=number, repeat=repeat)) / number
        out[label] = t
        results[label] = fn(*args)
    diff = (float(np.max(np.abs(results["python"] - results["cython"])))
            if "cython" in results else float("nan"))
    return out, diff


def main():
    cases = [("log_series_sum", _log_series_case()),
             ("cos_transform", _cos_transform_case(rows=1)),
             ("cos_transform", _cos_transform_case(rows=8))]
    print(f"{'kernel':<16}{'python [ms]':>14}{'cython [ms]':>14}{'speedup':>10}{'max |diff|':>14}")
    for name, args in cases:
        t, diff = bench(name, args)
        tc = t.get("cython", float("nan"))
        print(f"{name:<16}{1e3 * t['python']:>14.3f}{1e3 * tc:>14.3f}"
              f"{t['python'] / tc:>10.1f}{diff:>14.2e}")


if __name__ == "__main__":
    main()
