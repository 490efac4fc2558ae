"""Compare the compiled and pure-Python branch-and-bound kernels on identical inputs.

Each case is compiled once and handed to both kernels with the same upper
bound and node budget; the results must match exactly, so the only thing that
differs is speed.

    python benchmarks/bench_kernels.py [--budget N] [--repeat R]
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
import time

from composedc.domain import ArchitectureKind, build_topology
from composedc.optimizer import HeuristicInfeasibleError, MilpInstance, solve_greedy
from composedc.optimizer.compile import compile_instance
from composedc.optimizer.exact import TIE_EPS
from composedc.optimizer.kernel import compiled_search, python_search
from composedc.wlgen import generate_workloads


def cases(budget: int):
    """(label, kernel input, upper bound, node budget) tuples."""
    layouts = [
        (ArchitectureKind.TRADITIONAL, 20, 1),
        (ArchitectureKind.RACK_SCALE, 20, 2),
        (ArchitectureKind.POD_SCALE, 20, 2),
        (ArchitectureKind.RACK_SCALE, 40, 4),
    ]
    for kind, n, racks in layouts:
        for seed in (1, 2, 3):
            inst = MilpInstance(build_topology(kind, n, n, racks), tuple(generate_workloads(seed, n)))
            ki = compile_instance(inst, inst.canonical_order())
            try:
                ub = solve_greedy(inst).objective - ki.io_constant + 2 * TIE_EPS
            except HeuristicInfeasibleError:
                ub = float("inf")
            yield f"{kind.value}/{n}x{racks} s{seed}", ki, ub, budget
            if ki.pooled:
                # the module-level search is the heavier of the two modes
                yield f"{kind.value}/{n}x{racks} s{seed} mod", dataclasses.replace(ki, pooled=False), ub, budget


def timed(fn, ki, ub, budget, repeat):
    best, out = float("inf"), None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn(ki, ub, TIE_EPS, budget, 600.0)
        best = min(best, time.perf_counter() - t)
    return out, best


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--budget", type=int, default=20_000, help="node budget per search")
    ap.add_argument("--repeat", type=int, default=3, help="timing repeats (best is kept)")
    args = ap.parse_args(argv)
    if compiled_search is None:
        print("compiled kernel not built; run `pip install -e . --no-build-isolation`", file=sys.stderr)
        return 1

    print(f"{'case':34} {'nodes':>8} {'python s':>10} {'cython s':>10} {'speedup':>8}")
    tot_py = tot_cy = 0.0
    for label, ki, ub, budget in cases(args.budget):
        a, tp = timed(python_search, ki, ub, budget, args.repeat)
        b, tc = timed(compiled_search, ki, ub, budget, args.repeat)
        if a != b:
            print(f"{label}: kernels disagree", file=sys.stderr)
            return 1
        tot_py += tp
        tot_cy += tc
        print(f"{label:34} {a[4]:8d} {tp:10.4f} {tc:10.4f} {tp / tc:7.1f}x")
    print(f"{'total':34} {'':8} {tot_py:10.4f} {tot_cy:10.4f} {tot_py / tot_cy:7.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
