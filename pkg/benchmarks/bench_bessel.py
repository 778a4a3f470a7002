"""Benchmark the Bessel kernels: compiled extension vs numpy fallback.

Run from the repository root after an editable install:

    python3 benchmarks/bench_bessel.py
"""

import time

import numpy as np

from nimcavity import _bessel_py

try:
    from nimcavity import _bessel_cy
except ImportError:
    _bessel_cy = None


def timeit(fn, *args, repeat=5):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    rng = np.random.default_rng(0)
    x_wide = rng.uniform(1e-3, 60.0, 1_000_000)
    x_table = rng.uniform(0.05, 10.0, 200_000)  # Miller-dominated regime

    cases = [
        ("j0, 1e6 pts", "j0", (x_wide,)),
        ("y1, 1e6 pts", "y1", (x_wide,)),
        ("jn_fill lmax=6, 2e5 pts", "jn_fill", (6, x_table)),
        ("yn_fill lmax=6, 2e5 pts", "yn_fill", (6, x_table)),
    ]

    backends = [("python", _bessel_py)]
    if _bessel_cy is not None:
        backends.append(("cython", _bessel_cy))
    else:
        print("compiled extension not available; timing fallback only")

    header = f"{'case':<28}" + "".join(f"{name:>12}" for name, _ in backends)
    if len(backends) == 2:
        header += f"{'speedup':>10}"
    print(header)
    for label, attr, args in cases:
        times = [timeit(getattr(mod, attr), *args) for _, mod in backends]
        row = f"{label:<28}" + "".join(f"{t * 1e3:>10.1f}ms" for t in times)
        if len(times) == 2:
            row += f"{times[0] / times[1]:>9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
