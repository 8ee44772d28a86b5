"""Timing of the numba kernels against the pure-numpy fallback.

    python3 benchmarks/bench_backends.py [--repeat 5]

Both backends are loaded side by side (the env flag only chooses the default),
so one invocation reports both columns. Compilation is excluded: every kernel
is called once before timing.
"""
import argparse
import time

import numpy as np

from symvort import core, kernels
from symvort._jit import numba_available


def best_of(fn, repeat, number):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        for _ in range(number):
            fn()
        best = min(best, (time.perf_counter() - t0) / number)
    return best


def cases(be, sys, nsteps):
    z, gam = core.kernel_arrays(sys)
    m = sys.m
    c, a = core.energy_prefactor(m), core.force_prefactor(m)
    eps2 = core.COLLISION_EPS**2
    return {
        "hamiltonian": lambda: be.hamiltonian(z, gam, m, c),
        "velocity": lambda: be.velocity(z, gam, m, a),
        "velocity_jacobian": lambda: be.velocity_jacobian(z, gam, m, a),
        f"midpoint x{nsteps}": lambda: be.run(z.copy(), gam, m, a, 1e-3, kernels.MIDPOINT, 1e-12, 50, eps2, nsteps),
        f"rk4 x{nsteps}": lambda: be.run(z.copy(), gam, m, a, 1e-3, kernels.RK4, 1e-12, 50, eps2, nsteps),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--steps", type=int, default=200)
    args = ap.parse_args()

    names = ["numpy"] + (["numba"] if numba_available() else [])
    rng = np.random.default_rng(0)
    print(f"{'case':>26s} " + " ".join(f"{n:>12s}" for n in names) + "   speedup")
    for m, n in [(1, 3), (2, 3), (2, 10), (3, 30)]:
        sys = core.random_system(m, n, rng, min_sep=0.3)
        rows = {}
        for name in names:
            for label, fn in cases(kernels.get_backend(name), sys, args.steps).items():
                fn()  # compile / warm caches
                number = 3 if "x" in label.split()[-1] else 200
                rows.setdefault(label, {})[name] = best_of(fn, args.repeat, number)
        for label, t in rows.items():
            speed = t["numpy"] / t["numba"] if "numba" in t else float("nan")
            cols = " ".join(f"{t[k] * 1e6:10.1f}us" for k in names)
            print(f"{f'm={m} N={n} {label}':>26s} {cols}   {speed:7.1f}x")


if __name__ == "__main__":
    main()
