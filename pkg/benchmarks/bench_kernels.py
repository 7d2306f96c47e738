"""Timing comparison of the jit kernels against the pure-numpy fallback.

Runs the three hot kernels (forward product, log-domain product, adjoint
product) at a few representative table sizes and prints median wall
times per call plus the speedup.  Run directly:

    python3 benchmarks/bench_kernels.py

With RUELLEOP_BACKEND=numpy (or without numba installed) only the
fallback column is filled in.
"""

import time

import numpy as np

import ruelleop as ro
from ruelleop import _kernels

REPEATS = 200


def median_time(fn, *args):
    fn(*args)  # warm the call (and the JIT on the numba path)
    times = []
    for _ in range(REPEATS):
        t0 = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - t0)
    return float(np.median(times))


def bench_case(n_sym, depth):
    sp = ro.uniform_space(n_sym)
    rng = np.random.default_rng(7)
    f = ro.Potential(sp, 2, rng.uniform(-1.0, 1.0, n_sym * n_sym))
    kernel = ro.build_kernel(f, depth)
    ew_col = np.repeat(sp.weights, n_sym) * np.exp(f.table)
    ew = ew_col.reshape(n_sym, n_sym)
    lew = np.log(ew)
    s_pot = n_sym ** (depth - 1)
    n_rep = n_sym ** (depth - 2)
    phi = rng.uniform(0.5, 1.5, kernel.size)
    nu = phi / phi.sum()

    rows = []
    cases = [
        ("matvec", (phi, ew, n_sym, s_pot)),
        ("log_matvec", (np.log(phi), lew, n_sym, s_pot)),
        ("tmatvec", (nu, ew_col, n_sym, n_rep)),
    ]
    for name, args in cases:
        attr = "tmatvec_deep" if name == "tmatvec" else name
        base = median_time(getattr(_kernels, attr + "_numpy"), *args)
        fast = None
        if _kernels.HAS_NUMBA:
            fast = median_time(getattr(_kernels, attr + "_numba"), *args)
        rows.append((attr, kernel.size, base, fast))
    return rows


def main():
    print(f"backend selected at import: {_kernels.BACKEND}")
    print(f"{'kernel':<12} {'size':>8} {'numpy':>12} {'numba':>12} {'speedup':>8}")
    for n_sym, depth in ((2, 10), (2, 16), (5, 6)):
        for name, size, base, fast in bench_case(n_sym, depth):
            if fast is None:
                print(f"{name:<12} {size:>8} {base * 1e6:>10.1f}us {'-':>12} {'-':>8}")
            else:
                print(
                    f"{name:<12} {size:>8} {base * 1e6:>10.1f}us "
                    f"{fast * 1e6:>10.1f}us {base / fast:>7.1f}x"
                )


if __name__ == "__main__":
    main()
