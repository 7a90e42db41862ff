"""Compare the compiled and pure-Python monodromy kernels.

    python3 benchmarks/bench_kernels.py [--repeat 3]
"""
import argparse
import time

import numpy as np

from laplace_toda import _kernels_py, floquet, semidisc

try:
    from laplace_toda import _kernels as compiled
except ImportError:
    compiled = None


def best_of(fn, repeat):
    best, out = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--tol", type=float, default=1e-10)
    args = ap.parse_args()
    if compiled is None:
        print("compiled kernel not built; nothing to compare")
        return
    rng = np.random.default_rng(0)
    print(f"{'N':>2} {'deg':>3} {'rho':>12} {'steps':>6} {'python s':>10} {'cython s':>10} "
          f"{'speedup':>8} {'max diff':>9}")
    for N, degree in ((2, 2), (3, 3), (4, 3), (4, 6)):
        L = semidisc.random_operator(N, degree, rng)
        sys = floquet.FloquetSystem(L.a, L.c, L.period)
        for rho in (0.0, 2.0 + 1.0j, -3.0):
            modes = sys.A_modes(rho)
            run = lambda f: f(modes, sys.T, 0.0, sys.T, np.eye(N), args.tol, args.tol)  # noqa: E731
            tp, outp = best_of(lambda: run(_kernels_py.integrate_fourier_matrix), args.repeat)
            tc, outc = best_of(lambda: run(compiled.integrate_fourier_matrix), args.repeat)
            diff = float(np.max(np.abs(outp[0] - outc[0])))
            print(f"{N:>2} {degree:>3} {str(complex(rho)):>12} {outc[2]:>6} {tp:>10.4f} "
                  f"{tc:>10.5f} {tp / tc:>8.1f} {diff:>9.1e}")


if __name__ == "__main__":
    main()
