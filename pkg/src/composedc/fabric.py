"""Tier attribution of workload flows and per-tier network power."""

from __future__ import annotations

import enum
from typing import Mapping, Sequence, Union

from .domain import (
    FlowKind,
    Location,
    Placement,
    ResourceKind,
    Tier,
    Topology,
    Workload,
    EpbTable,
    locate,
)

__all__ = [
    "FlowKind",
    "GATEWAY",
    "TierPolicy",
    "FabricError",
    "tier_set",
    "traffic_by_tier",
    "traffic_breakdown",
    "network_power_by_tier",
    "pair_energy",
    "io_energy",
]


class FabricError(ValueError):
    """A flow was routed between endpoints it cannot connect."""


class TierPolicy(str, enum.Enum):
    TOP_TIER = "top-tier"  # a flow counts once, at the highest tier it reaches
    FULL_PATH = "full-path"  # a flow counts at every tier hop of its route


class _Gateway:
    def __repr__(self) -> str:
        return "GATEWAY"


GATEWAY = _Gateway()

Endpoint = Union[Location, _Gateway]


def _module_to_module(topology: Topology, policy: TierPolicy, src: Location, dst: Location) -> tuple[Tier, ...]:
    traditional = not topology.kind.disaggregated
    if traditional and src.board is not None and src.board == dst.board:
        return (Tier.ON_BOARD,)
    if not traditional and src.rack == dst.rack:
        return (Tier.RACK_BACKPLANE,)
    # servers talk over their NICs straight into the inter-rack fabric
    if policy is TierPolicy.TOP_TIER:
        return (Tier.INTER_RACK,)
    edge = Tier.ON_BOARD if traditional else Tier.RACK_BACKPLANE
    return (edge, edge, Tier.INTER_RACK)


def _module_to_gateway(topology: Topology, policy: TierPolicy) -> tuple[Tier, ...]:
    if policy is TierPolicy.TOP_TIER:
        return (Tier.INTER_DC,)
    edge = Tier.RACK_BACKPLANE if topology.kind.disaggregated else Tier.ON_BOARD
    return (edge, Tier.INTER_RACK, Tier.INTER_DC)


def tier_set(
    topology: Topology,
    policy: TierPolicy,
    kind: FlowKind,
    src: Location,
    dst: Endpoint,
) -> tuple[Tier, ...]:
    """Tiers a flow is attributed to, as a sorted multiset."""
    policy = TierPolicy(policy)
    kind = FlowKind(kind)
    if src.module_id not in topology:
        raise FabricError(f"source {src.module_id} is not part of the topology")
    if kind.is_cpu_mem:
        if dst is GATEWAY:
            raise FabricError(f"{kind.value} runs between CPU and memory modules, not to the gateway")
        if dst.module_id not in topology:
            raise FabricError(f"destination {dst.module_id} is not part of the topology")
        return _module_to_module(topology, policy, src, dst)
    if dst is not GATEWAY:
        raise FabricError(f"{kind.value} must terminate at the gateway, not at module {dst.module_id}")
    return _module_to_gateway(topology, policy)


def _zero() -> dict[Tier, float]:
    return {t: 0.0 for t in Tier}


def traffic_breakdown(
    topology: Topology,
    workloads: Sequence[Workload],
    placement: Placement,
    policy: TierPolicy,
) -> dict[str, dict[Tier, float]]:
    """Per-tier traffic split into CPU-memory (east-west) and IO (north-south) parts."""
    cpu_mem, io = _zero(), _zero()
    for w in sorted(workloads, key=lambda w: w.id):
        cpu_id, mem_id = placement[w.id]
        where = {ResourceKind.CPU: locate(topology, cpu_id), ResourceKind.MEM: locate(topology, mem_id)}
        for kind, rate in w.flows.items():
            if kind.is_cpu_mem:
                tiers, bucket = tier_set(topology, policy, kind, where[ResourceKind.CPU], where[ResourceKind.MEM]), cpu_mem
            else:
                tiers, bucket = tier_set(topology, policy, kind, where[kind.source_kind], GATEWAY), io
            for t in tiers:
                bucket[t] += rate
    return {"cpu_mem": cpu_mem, "io": io}


def traffic_by_tier(
    topology: Topology,
    workloads: Sequence[Workload],
    placement: Placement,
    policy: TierPolicy,
) -> dict[Tier, float]:
    parts = traffic_breakdown(topology, workloads, placement, policy)
    return {t: parts["cpu_mem"][t] + parts["io"][t] for t in Tier}


def network_power_by_tier(traffic: Mapping[Tier, float], epb: EpbTable) -> tuple[dict[Tier, float], float]:
    """Gbps x pJ/bit = mW, hence the 1e-3 to get watts."""
    power = {t: traffic.get(t, 0.0) * epb[t] * 1e-3 for t in Tier}
    total = 0.0
    for t in Tier:
        total += power[t]
    return power, total


def pair_energy(topology: Topology, policy: TierPolicy, cpu: Location, mem: Location) -> float:
    """Watts per Gbps of CPU-memory traffic between two module locations."""
    tiers = _module_to_module(topology, TierPolicy(policy), cpu, mem)
    return sum(topology.epb[t] for t in tiers) * 1e-3


def io_energy(topology: Topology, policy: TierPolicy) -> float:
    """Watts per Gbps of IO traffic; placement-independent."""
    return sum(topology.epb[t] for t in _module_to_gateway(topology, TierPolicy(policy))) * 1e-3


def io_category(tier: Tier) -> str:
    """Report label for IO traffic seen at a tier."""
    if tier in (Tier.ON_BOARD, Tier.RACK_BACKPLANE):
        return "io_in_pool"
    if tier is Tier.INTER_RACK:
        return "io_in_pod"
    return "pod_io"
