from __future__ import annotations

import dataclasses
import math
import random

import pytest

from composedc.domain import (
    CPU_SPEC,
    MEM_SPEC,
    ArchitectureKind,
    Module,
    ResourceKind,
    ResourceSpec,
    Topology,
    Workload,
    build_topology,
    module_id,
)
from composedc.fabric import TierPolicy
from composedc.optimizer import HeuristicInfeasibleError, MilpInstance, objective_value, solve_greedy
from composedc.optimizer.compile import compile_instance
from composedc.optimizer.exact import TIE_EPS
from composedc.optimizer.kernel import compiled_search, get_search
from composedc.optimizer.model import placement_from_indices
from composedc.wlgen import TABLE2_FLOWS

KERNELS = ["python"] + (["cython"] if compiled_search is not None else [])


def wl(i: int, cpu: int, mem: int, flows=None) -> Workload:
    """Workload with demands in deci-units and the default flow rates."""
    return Workload(i, cpu, mem, dict(TABLE2_FLOWS if flows is None else flows))


def mixed_topology(kind: ArchitectureKind, rnd: random.Random) -> Topology:
    """Small topology whose modules do not all share one spec."""
    n = rnd.randint(2, 4)
    caps_c = [rnd.choice([24, 36, 48]) for _ in range(n)]
    caps_m = [rnd.choice([160, 240]) for _ in range(n)]
    mods = []
    if kind is ArchitectureKind.TRADITIONAL:
        for s in range(n):
            mods.append(Module(module_id(ResourceKind.CPU, s), ResourceSpec(ResourceKind.CPU, caps_c[s], 130.0, 0.3), s, 0, s))
            mods.append(Module(module_id(ResourceKind.MEM, s), ResourceSpec(ResourceKind.MEM, caps_m[s], 40.0, 0.3), s, 0, s))
        return Topology(kind, tuple(mods), (0,))
    racks = 2
    for i in range(n):
        rc = i % racks if kind is ArchitectureKind.RACK_SCALE else 0
        rm = i % racks if kind is ArchitectureKind.RACK_SCALE else 1
        mods.append(Module(module_id(ResourceKind.CPU, i), ResourceSpec(ResourceKind.CPU, caps_c[i], 100.0 + 10 * i, 0.3), i, rc))
        mods.append(Module(module_id(ResourceKind.MEM, i), ResourceSpec(ResourceKind.MEM, caps_m[i], 40.0, 0.25 + 0.05 * i), i, rm))
    return Topology(kind, tuple(mods), tuple(range(racks)))


def random_small_instance(rnd: random.Random, max_workloads: int = 6, max_modules: int = 4) -> MilpInstance:
    """Oracle-sized instance: at most ``max_workloads`` workloads and ``max_modules`` modules per kind."""
    kind = rnd.choice(list(ArchitectureKind))
    policy = rnd.choice(list(TierPolicy))
    if rnd.random() < 0.2:
        topo = mixed_topology(kind, rnd)
        cap_c = min(m.spec.capacity for m in topo.cpus)
        cap_m = min(m.spec.capacity for m in topo.mems)
    else:
        if kind is ArchitectureKind.TRADITIONAL:
            n = rnd.randint(1, max_modules)
            topo = build_topology(kind, n, n, rnd.randint(1, n))
        elif kind is ArchitectureKind.RACK_SCALE:
            racks = rnd.choice([1, 2])
            nc = racks * rnd.randint(1, max_modules // racks)
            nm = racks * rnd.randint(1, max_modules // racks)
            topo = build_topology(kind, nc, nm, racks)
        else:
            racks = rnd.choice([2, 3]) if max_modules >= 2 else 2
            nc = rnd.randint((racks + 1) // 2, max_modules)
            nm = rnd.randint(racks // 2, max_modules)
            topo = build_topology(kind, nc, nm, racks)
        cap_c, cap_m = CPU_SPEC.capacity, MEM_SPEC.capacity
    n_w = rnd.randint(0, max_workloads)
    flows = dict(TABLE2_FLOWS)
    if rnd.random() < 0.3:
        flows = {k: float(rnd.randint(0, 200)) for k in TABLE2_FLOWS}
    ws = [wl(i, rnd.randint(5, cap_c), rnd.randint(20, cap_m // 2), flows) for i in range(n_w)]
    return MilpInstance(topo, tuple(ws), policy, allow_cross_rack=rnd.random() < 0.75)


def kernel_solve(inst: MilpInstance, kernel: str, pooled: bool = True, node_budget: int = 10_000_000):
    """Run one kernel directly. ``pooled=False`` forces the module-level search.

    Returns ``(objective, placement, complete)``; objective is None when no
    placement was found.
    """
    order = inst.canonical_order()
    ki = compile_instance(inst, order)
    if not pooled:
        ki = dataclasses.replace(ki, pooled=False)
    try:
        ub = solve_greedy(inst).objective - ki.io_constant + 2 * TIE_EPS
    except HeuristicInfeasibleError:
        ub = math.inf
    found, ci, mi, _, _, complete = get_search(kernel)(ki, ub, TIE_EPS, node_budget, 600.0)
    if not found:
        if math.isfinite(ub):
            seed = solve_greedy(inst)
            return seed.objective, seed.placement, complete
        return None, None, complete
    p = placement_from_indices(inst, order, ci, mi)
    return objective_value(inst, p), p, complete


@pytest.fixture(params=KERNELS)
def kernel(request):
    return request.param
