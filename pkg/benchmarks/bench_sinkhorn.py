"""Compare the compiled and NumPy log-domain Sinkhorn kernels.

Times one row and one column soft-min half-step per backend on square 1D
grids, then a full log-domain solve between two normals at a temperature
small enough to force the log-domain path. Run with::

    python3 benchmarks/bench_sinkhorn.py [--sizes 64,128,256] [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from entropic_gaussians import _kernels
from entropic_gaussians.oracle import Grid, discretize, gaussian_1d, sinkhorn, squared_distance_cost


def _problem(points):
    p, q = gaussian_1d(0.0, 1.0), gaussian_1d(1.0, 2.0)
    gx, gy = Grid.around(p, points, 6.0), Grid.around(q, points, 6.0)
    cost = squared_distance_cost(gx.points(), gy.points())
    return discretize(p, gx), discretize(q, gy), cost


def _half_steps(rows, cols, a, b, cost, eps):
    g = np.zeros_like(b)
    f = rows(cost, g, np.log(b), eps)
    cols(cost, f, np.log(a), eps)


def _solve_with(backend, a, b, cost, eps):
    saved = _kernels.softmin_rows, _kernels.softmin_cols
    _kernels.softmin_rows, _kernels.softmin_cols = backend
    try:
        return sinkhorn(a, b, cost, eps, tol=1e-9)
    finally:
        _kernels.softmin_rows, _kernels.softmin_cols = saved


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", default="64,128,256")
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--eps", type=float, default=0.02, help="temperature for the full solve")
    args = parser.parse_args(argv)
    sizes = [int(s) for s in args.sizes.split(",")]
    found = _kernels.backends()
    if "cython" not in found:
        print("compiled extension not built; only the NumPy backend is available")
    print(f"import-time backend: {_kernels.BACKEND}")

    print(f"\n{'points':>7} {'backend':>8} {'half-steps ms':>14} {'solve ms':>10} {'iters':>6} {'speedup':>8}")
    for n in sizes:
        a, b, cost = _problem(n)
        ref_plan, base = None, {}
        for name, (rows, cols) in found.items():
            number = max(1, 20000 // (n * n) * 10)
            half = min(timeit.repeat(lambda: _half_steps(rows, cols, a, b, cost, 1.0), number=number, repeat=args.repeat)) / number
            t0 = timeit.default_timer()
            plan = _solve_with((rows, cols), a, b, cost, args.eps)
            solve = timeit.default_timer() - t0
            if ref_plan is None:
                ref_plan = plan.weights
            else:
                gap = float(np.max(np.abs(plan.weights - ref_plan)))
                assert gap <= 1e-12, f"backends disagree by {gap:.2e}"
            base[name] = half
            speed = base["python"] / half if name != "python" else 1.0
            print(f"{n:>7} {name:>8} {half * 1e3:>14.3f} {solve * 1e3:>10.1f} {plan.iterations:>6} {speed:>7.2f}x")


if __name__ == "__main__":
    main()
