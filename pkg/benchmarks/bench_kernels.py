"""Compare the compiled and pure-Python local-search kernels.

    python benchmarks/bench_kernels.py [--sizes 25 50 100] [--repeats 5]

For each variant and size, both kernels improve the same constructed routes;
the script checks that they agree and prints the median time of each.
"""

import argparse
import statistics
import time

from vrpdelegate.generate import GenSpec
from vrpdelegate.subsolver.builtin import _compiled, construct, improve


def time_kernel(inst, start, backend, steps, repeats):
    times = []
    for _ in range(repeats):
        routes = [list(r) for r in start]
        t0 = time.perf_counter()
        improve(inst, routes, steps, backend)
        times.append(time.perf_counter() - t0)
    return statistics.median(times), routes


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[25, 50, 100])
    ap.add_argument("--variants", nargs="+", default=["CVRP", "CVRPTW", "VRPMPD"])
    ap.add_argument("--steps", type=int, default=500)
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    if _compiled is None:
        raise SystemExit("compiled kernel not built; run `pip install -e . --no-build-isolation` first")

    print(f"{'variant':8} {'n':>5} {'python ms':>10} {'cython ms':>10} {'speedup':>8}  same")
    for variant in args.variants:
        for n in args.sizes:
            inst = GenSpec(variant, n, "uniform", 0, args.seed).build()
            start = construct(inst, args.seed)
            tp, rp = time_kernel(inst, start, "python", args.steps, args.repeats)
            tc, rc = time_kernel(inst, start, "cython", args.steps, args.repeats)
            print(f"{variant:8} {n:5d} {tp * 1e3:10.2f} {tc * 1e3:10.2f} {tp / tc:8.1f}x  {rp == rc}")


if __name__ == "__main__":
    main()
