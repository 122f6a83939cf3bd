"""Compare the numba kernels against the pure-numpy fallback.

Run with ``python benchmarks/bench_kernels.py [--repeat N]``. Each kernel is
called once first so numba compilation is excluded from the timings.
"""

import argparse
import timeit

import numpy as np

from driftfilter.kernels import PAPER_DERIVATIVE, _numba, _numpy

SIGMA, RHO, B, DT = 10.0, 28.0, 8.0 / 3.0, 0.01


def cases(gen):
    for n in (100, 1000, 4000):
        w = gen.dirichlet(np.ones(n))
        yield f"derivative_row_sums N={n}", "derivative_row_sums", (w, PAPER_DERIVATIVE, 0.5, 0.5)
        yield f"energy_pair_sum N={n}", "energy_pair_sum", (w, 0.5, 0.5)
    for n in (50, 1000):
        X = gen.normal(size=(n, 3)) * 5 + [0.0, 0.0, 25.0]
        inc = gen.normal(size=(10, n, 3)) * 0.3
        yield f"rk4_propagate N={n} x10", "rk4_propagate", (X, SIGMA, RHO, B, DT, 10)
        yield f"rk4_propagate_noisy N={n} x10", "rk4_propagate_noisy", (X, SIGMA, RHO, B, DT, inc)
    for n in (100, 10000):
        cdf = np.cumsum(gen.dirichlet(np.ones(n)))
        cdf[-1] = 1.0
        yield f"systematic_indices N={n}", "systematic_indices", (cdf, 0.3 / n)


def best_of(fn, args, repeat):
    fn(*args)
    timer = timeit.Timer(lambda: fn(*args))
    loops, _ = timer.autorange()
    return min(timer.repeat(repeat, loops)) / loops


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)
    gen = np.random.default_rng(0)
    print(f"{'kernel':<34}{'numba':>12}{'numpy':>12}{'speedup':>10}")
    for label, name, call_args in cases(gen):
        t_nb = best_of(getattr(_numba, name), call_args, args.repeat)
        t_np = best_of(getattr(_numpy, name), call_args, args.repeat)
        print(f"{label:<34}{t_nb * 1e6:>10.1f}us{t_np * 1e6:>10.1f}us{t_np / t_nb:>9.1f}x")


if __name__ == "__main__":
    main()
