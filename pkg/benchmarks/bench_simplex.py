"""Timing comparison of the two simplex kernels.

Runs the same LPs through the pure numpy kernel and, when built, the
compiled one.  The two are required to take identical pivot paths, so
besides wall time the script also reports iteration counts and fails
loudly if the backends ever disagree on them.

    python3 benchmarks/bench_simplex.py --sizes 40x80 120x240 --repeats 5
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from tap.solve import LinearProgram, compiled_available, solve_lp


def random_lp(rng: np.random.Generator, m: int, n: int) -> LinearProgram:
    # 0/1 boxes with a feasible witness planted, like a relaxed assignment
    a = np.round(rng.uniform(-2, 3, size=(m, n)), 2)
    a[rng.random(size=a.shape) < 0.5] = 0.0
    witness = (rng.random(n) < 0.4).astype(float)
    act = a @ witness
    senses = []
    rhs = np.empty(m)
    for i in range(m):
        kind = rng.integers(3)
        if kind == 0:
            senses.append("<=")
            rhs[i] = act[i] + round(float(rng.uniform(0, 1)), 2)
        elif kind == 1:
            senses.append(">=")
            rhs[i] = act[i] - round(float(rng.uniform(0, 1)), 2)
        else:
            senses.append("=")
            rhs[i] = act[i]
    c = np.round(rng.uniform(-1, 1, size=n), 2)
    return LinearProgram(c=c, a=a, senses=tuple(senses), rhs=rhs,
                         lower=np.zeros(n), upper=np.ones(n))


def run_backend(problems, backend: str) -> tuple[float, list[int]]:
    t0 = time.perf_counter()
    iterations = []
    for lp in problems:
        result = solve_lp(lp, backend=backend)
        iterations.append(result.iterations)
    return time.perf_counter() - t0, iterations


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", nargs="+", default=["30x60", "80x160", "200x400"],
                        metavar="MxN", help="row by column sizes to time")
    parser.add_argument("--repeats", type=int, default=10,
                        help="problems per size")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    compiled = compiled_available()
    print(f"compiled kernel available: {compiled}")
    header = f"{'size':>10} {'numpy':>12} {'compiled':>12} {'speedup':>9}  iterations"
    print(header)
    print("-" * len(header))

    for size in args.sizes:
        m, n = (int(part) for part in size.split("x"))
        rng = np.random.default_rng(args.seed)
        problems = [random_lp(rng, m, n) for _ in range(args.repeats)]

        t_numpy, it_numpy = run_backend(problems, "numpy")
        if compiled:
            t_comp, it_comp = run_backend(problems, "cython")
            if it_comp != it_numpy:
                raise SystemExit(
                    f"kernel disagreement at {size}: {it_numpy} vs {it_comp}"
                )
            speedup = t_numpy / t_comp if t_comp > 0 else float("inf")
            print(f"{size:>10} {t_numpy:>10.4f}s {t_comp:>10.4f}s {speedup:>8.2f}x"
                  f"  {sum(it_numpy)}")
        else:
            print(f"{size:>10} {t_numpy:>10.4f}s {'-':>12} {'-':>9}  {sum(it_numpy)}")


if __name__ == "__main__":
    main()
