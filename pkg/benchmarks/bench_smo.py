"""Benchmark the compiled SMO kernel against the numpy fallback.

Builds seeded two-class blob problems of growing size, times both backends
on identical inputs, and checks their alpha vectors match exactly.

Usage: python benchmarks/bench_smo.py [--sizes 100,200,400] [--repeats 3]
"""

import argparse
import time

import numpy as np

from gsremotion import _core
from gsremotion.kernels import KernelSpec, gram


def make_problem(n: int, seed: int):
    rng = np.random.default_rng(seed)
    half = n // 2
    X = np.vstack([
        rng.normal(0.0, 1.0, size=(half, 8)),
        rng.normal(1.2, 1.0, size=(n - half, 8)),
    ])
    y = np.concatenate([np.ones(half), -np.ones(n - half)])
    spec = KernelSpec(kind="rbf", eta=1.0 / 8.0)
    K = gram(spec, X)
    Q = K * np.outer(y, y)
    tiebreak = rng.random(n)
    return Q, y, tiebreak


def run(solver, Q, y, tiebreak, repeats: int):
    best = float("inf")
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = solver(Q, y, 1.0, 1e-3, 200_000, tiebreak)
        best = min(best, time.perf_counter() - t0)
    return best, result


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", default="100,200,400,800")
    parser.add_argument("--repeats", type=int, default=3)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()

    sizes = [int(s) for s in args.sizes.split(",")]
    backends = _core.available_backends()
    print(f"available backends: {', '.join(backends)}")
    if "compiled" not in backends:
        print("compiled extension not built; timing the python backend only")

    header = f"{'n':>6} {'python (s)':>12}"
    if "compiled" in backends:
        header += f" {'compiled (s)':>13} {'speedup':>9} {'alphas':>8}"
    print(header)
    for n in sizes:
        Q, y, tiebreak = make_problem(n, args.seed)
        t_py, res_py = run(_core.get_solver("python"), Q, y, tiebreak, args.repeats)
        line = f"{n:>6} {t_py:>12.4f}"
        if "compiled" in backends:
            t_cy, res_cy = run(_core.get_solver("compiled"), Q, y, tiebreak, args.repeats)
            same = bool(np.array_equal(res_py[0], res_cy[0]))
            line += f" {t_cy:>13.4f} {t_py / t_cy:>8.1f}x {'equal' if same else 'DIFFER':>8}"
            if not same:
                raise SystemExit(f"backend mismatch at n={n}")
        print(line)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
