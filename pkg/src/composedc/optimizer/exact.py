from __future__ import annotations

import math
import time
from typing import Optional

from .compile import compile_instance
from .greedy import solve_greedy
from .kernel import get_search
from .model import (
    BudgetExhaustedError,
    HeuristicInfeasibleError,
    InfeasibleInstanceError,
    MilpInstance,
    SolveResult,
    finish,
    placement_from_indices,
)

DEFAULT_NODE_BUDGET = 10_000_000
DEFAULT_TIME_BUDGET = 300.0
TIE_EPS = 1e-9


def solve_exact(
    instance: MilpInstance,
    node_budget: int = DEFAULT_NODE_BUDGET,
    time_budget: float = DEFAULT_TIME_BUDGET,
    kernel: Optional[str] = None,
) -> SolveResult:
    """Depth-first branch-and-bound over workload assignments.

    Workloads are taken in descending CPU demand order. Traditional
    servers branch on the server per workload. Disaggregated topologies
    branch on every CPU module first and then on every memory module (largest
    memory demand first), modules in index order. A fresh module may only be
    opened if it is the next unopened one of its interchangeable group (same
    rack, same spec), and an untouched rack only if no identical lower rack
    is untouched. Where each rack holds one interchangeable group per kind,
    the search branches on racks rather than modules and counts modules by
    exact bin packing. The greedy placement seeds the upper bound. Placements
    within ``TIE_EPS`` W of each other count as ties and the first one
    reached in search order is kept.

    Raises InfeasibleInstanceError when the search proves no placement
    exists and BudgetExhaustedError when it stops on a budget without one.
    """
    start = time.perf_counter()
    order = instance.canonical_order()
    ki = compile_instance(instance, order)
    try:
        seed = solve_greedy(instance)
        ub = seed.objective - ki.io_constant + 2 * TIE_EPS
    except HeuristicInfeasibleError:
        seed, ub = None, math.inf
    found, cpu_idx, mem_idx, _, nodes, complete = get_search(kernel)(ki, ub, TIE_EPS, node_budget, time_budget)
    if found:
        placement = placement_from_indices(instance, order, cpu_idx, mem_idx)
    elif seed is not None:
        placement = seed.placement
    elif complete:
        raise InfeasibleInstanceError("no placement satisfies the capacity and locality constraints")
    else:
        raise BudgetExhaustedError(f"budget exhausted after {nodes} nodes without a feasible placement")
    return finish(instance, placement, complete, nodes, time.perf_counter() - start, "exact")
