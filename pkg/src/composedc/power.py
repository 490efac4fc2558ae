"""Resource power model and the CPU + memory + network objective breakdown."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .domain import Placement, ResourceKind, ResourceSpec, Tier, Topology, Workload
from .fabric import TierPolicy, network_power_by_tier, traffic_breakdown


class InfeasiblePlacementError(ValueError):
    """A placement overloads a module, leaves a workload unassigned, or splits a server."""

    def __init__(self, violations: Sequence[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations) or "infeasible placement")


def resource_power(spec: ResourceSpec, utilization: float) -> float:
    """Power of an active module: idle floor plus load-proportional dynamic part."""
    if not 0.0 <= utilization <= 1.0:
        raise ValueError(f"utilization must lie in [0, 1], got {utilization!r}")
    return (1.0 - spec.dynamic_range) * spec.peak_power + spec.dynamic_range * spec.peak_power * utilization


def module_loads(topology: Topology, workloads: Sequence[Workload], placement: Placement) -> dict[str, int]:
    """Assigned demand per module in deci-units (modules with nothing assigned map to 0)."""
    loads = {m.id: 0 for m in topology.modules}
    for w in workloads:
        if w.id not in placement.assignments:
            continue
        cpu_id, mem_id = placement[w.id]
        if cpu_id in loads:
            loads[cpu_id] += w.cpu_demand
        if mem_id in loads:
            loads[mem_id] += w.mem_demand
    return loads


def utilization_of(topology: Topology, workloads: Sequence[Workload], placement: Placement, module_id: str) -> float:
    m = topology.module(module_id)
    load = module_loads(topology, workloads, placement)[module_id]
    if load > m.spec.capacity:
        excess = (load - m.spec.capacity) / 10
        raise InfeasiblePlacementError([f"capacity: module {module_id} overloaded by {excess:g}"])
    return load / m.spec.capacity


@dataclass(frozen=True)
class PowerReport:
    tcpc: float
    tmpc: float
    tnpc: float
    total: float
    per_tier: Mapping[Tier, tuple[float, float]]  # tier -> (traffic Gbps, power W)
    active_cpus: int
    active_mems: int
    avg_active_cpu_util: float
    avg_active_mem_util: float
    io_traffic: Mapping[Tier, float] = field(default_factory=dict)

    @property
    def interdc_power(self) -> float:
        return self.per_tier[Tier.INTER_DC][1]

    def traffic_categories(self) -> dict[str, float]:
        """IO traffic by report category plus total CPU-memory traffic."""
        io = {t: self.io_traffic.get(t, 0.0) for t in Tier}
        cpu_mem = 0.0
        for t in Tier:
            cpu_mem += self.per_tier[t][0] - io[t]
        return {
            "cpu_mem": cpu_mem,
            "io_in_pool": io[Tier.ON_BOARD] + io[Tier.RACK_BACKPLANE],
            "io_in_pod": io[Tier.INTER_RACK],
            "pod_io": io[Tier.INTER_DC],
        }

    def to_dict(self) -> dict:
        return {
            "tcpc_w": self.tcpc,
            "tmpc_w": self.tmpc,
            "tnpc_w": self.tnpc,
            "total_w": self.total,
            "active_cpus": self.active_cpus,
            "active_mems": self.active_mems,
            "avg_active_cpu_util": self.avg_active_cpu_util,
            "avg_active_mem_util": self.avg_active_mem_util,
            "tiers": {
                t.label: {"traffic_gbps": self.per_tier[t][0], "power_w": self.per_tier[t][1]} for t in Tier
            },
            "traffic_categories_gbps": self.traffic_categories(),
        }


def placement_violations(topology: Topology, workloads: Sequence[Workload], placement: Placement) -> list[str]:
    """Every reason the placement is infeasible; empty when it is feasible."""
    out: list[str] = []
    ids = {w.id for w in workloads}
    for w in sorted(workloads, key=lambda w: w.id):
        if w.id not in placement.assignments:
            out.append(f"assignment: workload {w.id} is unassigned")
            continue
        cpu_id, mem_id = placement[w.id]
        for mid, kind in ((cpu_id, ResourceKind.CPU), (mem_id, ResourceKind.MEM)):
            if mid not in topology:
                out.append(f"assignment: workload {w.id} uses unknown module {mid}")
            elif topology.module(mid).kind is not kind:
                out.append(f"assignment: workload {w.id} {kind.value} demand placed on {mid}")
        if (
            not topology.kind.disaggregated
            and cpu_id in topology
            and mem_id in topology
            and topology.module(cpu_id).board != topology.module(mem_id).board
        ):
            out.append(f"co-location: workload {w.id} split across servers ({cpu_id}, {mem_id})")
    for wid in placement.assignments:
        if wid not in ids:
            out.append(f"assignment: placement names unknown workload {wid}")
    loads = module_loads(topology, workloads, placement)
    for m in sorted(topology.modules, key=lambda m: (m.kind.value, m.index)):
        if loads[m.id] > m.spec.capacity:
            out.append(f"capacity: module {m.id} overloaded by {(loads[m.id] - m.spec.capacity) / 10:g}")
    return out


def power_report(
    topology: Topology,
    workloads: Sequence[Workload],
    placement: Placement,
    policy: TierPolicy = TierPolicy.TOP_TIER,
) -> PowerReport:
    violations = placement_violations(topology, workloads, placement)
    if violations:
        raise InfeasiblePlacementError(violations)
    loads = module_loads(topology, workloads, placement)

    sums = {ResourceKind.CPU: 0.0, ResourceKind.MEM: 0.0}
    util_sums = {ResourceKind.CPU: 0.0, ResourceKind.MEM: 0.0}
    active = {ResourceKind.CPU: 0, ResourceKind.MEM: 0}
    for kind in ResourceKind:
        for m in topology.of_kind(kind):
            if loads[m.id] == 0:
                continue
            u = loads[m.id] / m.spec.capacity
            sums[kind] += resource_power(m.spec, u)
            util_sums[kind] += u
            active[kind] += 1

    parts = traffic_breakdown(topology, workloads, placement, policy)
    traffic = {t: parts["cpu_mem"][t] + parts["io"][t] for t in Tier}
    power, tnpc = network_power_by_tier(traffic, topology.epb)
    tcpc, tmpc = sums[ResourceKind.CPU], sums[ResourceKind.MEM]

    def avg(kind: ResourceKind) -> float:
        return util_sums[kind] / active[kind] if active[kind] else 0.0

    return PowerReport(
        tcpc=tcpc,
        tmpc=tmpc,
        tnpc=tnpc,
        total=tcpc + tmpc + tnpc,
        per_tier={t: (traffic[t], power[t]) for t in Tier},
        active_cpus=active[ResourceKind.CPU],
        active_mems=active[ResourceKind.MEM],
        avg_active_cpu_util=avg(ResourceKind.CPU),
        avg_active_mem_util=avg(ResourceKind.MEM),
        io_traffic=dict(parts["io"]),
    )
