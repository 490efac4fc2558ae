from __future__ import annotations

import time

from ..domain import Placement
from .model import HeuristicInfeasibleError, MilpInstance, SolveResult, finish


def solve_greedy(instance: MilpInstance) -> SolveResult:
    """First-fit-decreasing by CPU demand with least-marginal-power module choice.

    Each workload takes the CPU module whose power rises least (an already
    active module only adds its load term, a fresh one adds its idle floor
    too); its memory then goes where idle, load and CPU-memory traffic
    together rise least. Ties go to the lowest module index.
    """
    start = time.perf_counter()
    topo = instance.topology
    cpus, mems = topo.cpus, topo.mems
    paired = not topo.kind.disaggregated
    cload = {c.id: 0 for c in cpus}
    mload = {m.id: 0 for m in mems}
    partner = {c.id: topo.partner(c.id) for c in cpus} if paired else {}
    assignments: dict[int, tuple[str, str]] = {}

    for w in instance.canonical_order():
        best_c, best_cost = None, None
        for c in cpus:
            if cload[c.id] + w.cpu_demand > c.spec.capacity:
                continue
            cost = (c.spec.idle_power if cload[c.id] == 0 else 0.0) + c.spec.dynamic_power * w.cpu_demand / c.spec.capacity
            if paired:
                m = partner[c.id]
                if mload[m.id] + w.mem_demand > m.spec.capacity:
                    continue
                cost += (m.spec.idle_power if mload[m.id] == 0 else 0.0) + m.spec.dynamic_power * w.mem_demand / m.spec.capacity
                cost += w.cpu_mem_rate * instance.pair_energy(c.id, m.id)
            if best_cost is None or cost < best_cost:
                best_c, best_cost = c, cost
        if best_c is None:
            raise HeuristicInfeasibleError(f"no CPU module can take workload {w.id}")

        if paired:
            best_m = partner[best_c.id]
        else:
            best_m, best_cost = None, None
            for m in mems:
                if not instance.pair_allowed(best_c.id, m.id) or mload[m.id] + w.mem_demand > m.spec.capacity:
                    continue
                cost = (m.spec.idle_power if mload[m.id] == 0 else 0.0) + m.spec.dynamic_power * w.mem_demand / m.spec.capacity
                cost += w.cpu_mem_rate * instance.pair_energy(best_c.id, m.id)
                if best_cost is None or cost < best_cost:
                    best_m, best_cost = m, cost
            if best_m is None:
                raise HeuristicInfeasibleError(f"no memory module can take workload {w.id} next to {best_c.id}")

        cload[best_c.id] += w.cpu_demand
        mload[best_m.id] += w.mem_demand
        assignments[w.id] = (best_c.id, best_m.id)

    return finish(instance, Placement(assignments), False, len(assignments), time.perf_counter() - start, "greedy")
