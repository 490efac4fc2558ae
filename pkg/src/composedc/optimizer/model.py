from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

from ..domain import Placement, Topology, Workload, locate
from ..fabric import TierPolicy, pair_energy
from ..power import InfeasiblePlacementError, placement_violations, power_report


class InfeasibleInstanceError(ValueError):
    """No feasible placement exists (or a workload cannot fit any module)."""


class BudgetExhaustedError(RuntimeError):
    """The search stopped on its node/time budget before finding any placement."""


class HeuristicInfeasibleError(RuntimeError):
    """The greedy heuristic reached a dead end; an exact solve may still succeed."""


@dataclass(frozen=True)
class MilpInstance:
    topology: Topology
    workloads: tuple[Workload, ...]
    policy: TierPolicy = TierPolicy.TOP_TIER
    allow_cross_rack: bool = True  # rack-scale only: may a CPU use memory in another rack

    def __post_init__(self) -> None:
        object.__setattr__(self, "workloads", tuple(sorted(self.workloads, key=lambda w: w.id)))
        object.__setattr__(self, "policy", TierPolicy(self.policy))
        ids = [w.id for w in self.workloads]
        if len(set(ids)) != len(ids):
            raise ValueError("workload ids must be unique")
        cpu_cap = max(m.spec.capacity for m in self.topology.cpus)
        mem_cap = max(m.spec.capacity for m in self.topology.mems)
        for w in self.workloads:
            if w.cpu_demand > cpu_cap or w.mem_demand > mem_cap:
                raise InfeasibleInstanceError(
                    f"workload {w.id} ({w.cpu_demand / 10:g} GHz, {w.mem_demand / 10:g} GB) fits no module"
                )

    def canonical_order(self) -> list[Workload]:
        """Search order: descending CPU demand, ties by id."""
        return sorted(self.workloads, key=lambda w: (-w.cpu_demand, w.id))

    def pair_allowed(self, cpu_id: str, mem_id: str) -> bool:
        c, m = self.topology.module(cpu_id), self.topology.module(mem_id)
        if not self.topology.kind.disaggregated:
            return c.board == m.board
        if not self.allow_cross_rack and self.topology.kind.value == "rackscale":
            return c.rack == m.rack
        return True

    def pair_energy(self, cpu_id: str, mem_id: str) -> float:
        t = self.topology
        return pair_energy(t, self.policy, locate(t, cpu_id), locate(t, mem_id))

    def scaled(self, k: float) -> "MilpInstance":
        return MilpInstance(self.topology.scaled(k), self.workloads, self.policy, self.allow_cross_rack)


@dataclass(frozen=True)
class SolveResult:
    placement: Placement
    objective: float
    proven_optimal: bool
    nodes_explored: int
    wall_time: float = field(compare=False)
    solver: str = "exact"

    def to_dict(self) -> dict:
        """Deterministic encoding; wall time is left out on purpose."""
        return {
            "solver": self.solver,
            "objective_w": self.objective,
            "proven_optimal": self.proven_optimal,
            "nodes_explored": self.nodes_explored,
            "placement": self.placement.to_dict(),
        }


def check_feasible(instance: MilpInstance, placement: Placement) -> list[str]:
    """Every violated constraint; an empty list means the placement is feasible."""
    out = placement_violations(instance.topology, instance.workloads, placement)
    if instance.topology.kind.disaggregated and not instance.allow_cross_rack:
        for w in instance.workloads:
            if w.id in placement.assignments:
                c, m = placement[w.id]
                if c in instance.topology and m in instance.topology and not instance.pair_allowed(c, m):
                    out.append(f"rack-locality: workload {w.id} pairs {c} with {m} across racks")
    return out


def objective_value(instance: MilpInstance, placement: Placement) -> float:
    violations = check_feasible(instance, placement)
    if violations:
        raise InfeasiblePlacementError(violations)
    return power_report(instance.topology, instance.workloads, placement, instance.policy).total


def finish(
    instance: MilpInstance,
    placement: Placement,
    proven: bool,
    nodes: int,
    wall: float,
    solver: str,
    objective: Optional[float] = None,
) -> SolveResult:
    value = objective_value(instance, placement) if objective is None else objective
    return SolveResult(placement, value, proven, nodes, wall, solver)


def placement_from_indices(
    instance: MilpInstance, order: Sequence[Workload], cpu_idx: Sequence[int], mem_idx: Sequence[int]
) -> Placement:
    cpus, mems = instance.topology.cpus, instance.topology.mems
    return Placement({w.id: (cpus[c].id, mems[m].id) for w, c, m in zip(order, cpu_idx, mem_idx)})
