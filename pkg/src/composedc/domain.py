"""Data model for composable datacentre topologies and workloads.

Capacities and demands are integers in deci-units (0.1 GHz for CPU,
0.1 GB for memory) so that every capacity check is an exact integer
comparison. Powers are plain floats.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Mapping, Optional


class TopologyError(ValueError):
    """Raised when a topology request or layout violates a structural rule."""


class ResourceKind(str, enum.Enum):
    CPU = "cpu"
    MEM = "mem"


class FlowKind(str, enum.Enum):
    CPU_MEM_UP = "cpu_mem_up"
    CPU_MEM_DOWN = "cpu_mem_down"
    CPU_IO_UP = "cpu_io_up"
    CPU_IO_DOWN = "cpu_io_down"
    MEM_IO_UP = "mem_io_up"
    MEM_IO_DOWN = "mem_io_down"

    @property
    def is_cpu_mem(self) -> bool:
        return self in (FlowKind.CPU_MEM_UP, FlowKind.CPU_MEM_DOWN)

    @property
    def source_kind(self) -> ResourceKind:
        """Resource kind of the module end of an IO flow (CPU for CPU-memory flows)."""
        if self in (FlowKind.MEM_IO_UP, FlowKind.MEM_IO_DOWN):
            return ResourceKind.MEM
        return ResourceKind.CPU


class Tier(enum.IntEnum):
    """Fabric tiers, ordered from cheapest/innermost to outermost."""

    ON_BOARD = 0
    RACK_BACKPLANE = 1
    INTER_RACK = 2
    INTER_DC = 3

    @property
    def label(self) -> str:
        return _TIER_LABELS[self]

    @classmethod
    def from_label(cls, label: str) -> "Tier":
        for tier, name in _TIER_LABELS.items():
            if name == label:
                return tier
        raise ValueError(f"unknown tier {label!r}")


_TIER_LABELS = {
    Tier.ON_BOARD: "on_board",
    Tier.RACK_BACKPLANE: "rack_backplane",
    Tier.INTER_RACK: "inter_rack",
    Tier.INTER_DC: "inter_dc",
}


class ArchitectureKind(str, enum.Enum):
    TRADITIONAL = "traditional"
    RACK_SCALE = "rackscale"
    POD_SCALE = "podscale"

    @property
    def disaggregated(self) -> bool:
        return self is not ArchitectureKind.TRADITIONAL


@dataclass(frozen=True)
class ResourceSpec:
    kind: ResourceKind
    capacity: int  # deci-units
    peak_power: float  # W
    dynamic_range: float  # fraction of peak that scales with load

    def __post_init__(self) -> None:
        if not isinstance(self.capacity, int) or self.capacity <= 0:
            raise ValueError(f"capacity must be a positive integer of deci-units, got {self.capacity!r}")
        if not self.peak_power > 0:
            raise ValueError(f"peak_power must be > 0, got {self.peak_power!r}")
        if not 0.0 <= self.dynamic_range <= 1.0:
            raise ValueError(f"dynamic_range must lie in [0, 1], got {self.dynamic_range!r}")

    @property
    def idle_power(self) -> float:
        return (1.0 - self.dynamic_range) * self.peak_power

    @property
    def dynamic_power(self) -> float:
        return self.dynamic_range * self.peak_power

    def scaled(self, k: float) -> "ResourceSpec":
        return ResourceSpec(self.kind, self.capacity, self.peak_power * k, self.dynamic_range)

    def to_dict(self) -> dict:
        return {
            "capacity": self.capacity / 10,
            "peak_power_w": self.peak_power,
            "dynamic_range": self.dynamic_range,
        }


CPU_SPEC = ResourceSpec(ResourceKind.CPU, 36, 130.0, 0.3)
MEM_SPEC = ResourceSpec(ResourceKind.MEM, 240, 40.0, 0.3)


@dataclass(frozen=True)
class EpbTable:
    """Energy per bit of each fabric tier, in pJ/bit."""

    on_board: float = 1.0
    rack_backplane: float = 25.0
    inter_rack: float = 35.0
    inter_dc: float = 500.0

    def __post_init__(self) -> None:
        for tier in Tier:
            if not self[tier] >= 0:
                raise ValueError(f"energy per bit for {tier.label} must be >= 0, got {self[tier]!r}")

    def __getitem__(self, tier: Tier) -> float:
        return getattr(self, _TIER_LABELS[Tier(tier)])

    def scaled(self, k: float) -> "EpbTable":
        return EpbTable(*(self[t] * k for t in Tier))

    def to_dict(self) -> dict:
        return {t.label: self[t] for t in Tier}

    @classmethod
    def from_dict(cls, data: Mapping[str, float]) -> "EpbTable":
        unknown = set(data) - set(_TIER_LABELS.values())
        if unknown:
            raise ValueError(f"unknown tiers in epb table: {sorted(unknown)}")
        return cls(**{k: float(v) for k, v in data.items()})


DEFAULT_EPB = EpbTable()


@dataclass(frozen=True)
class Workload:
    id: int
    cpu_demand: int  # deci-GHz
    mem_demand: int  # deci-GB
    flows: Mapping[FlowKind, float]

    def __post_init__(self) -> None:
        if self.cpu_demand <= 0 or self.mem_demand <= 0:
            raise ValueError(f"workload {self.id}: demands must be positive")
        flows = {FlowKind(k): float(v) for k, v in self.flows.items()}
        if set(flows) != set(FlowKind):
            missing = sorted(k.value for k in set(FlowKind) - set(flows))
            raise ValueError(f"workload {self.id}: flows must cover all six kinds, missing {missing}")
        if any(v < 0 for v in flows.values()):
            raise ValueError(f"workload {self.id}: flow rates must be >= 0")
        ordered = {k: flows[k] for k in FlowKind}
        object.__setattr__(self, "flows", MappingProxyType(ordered))

    def __hash__(self) -> int:
        return hash((self.id, self.cpu_demand, self.mem_demand, tuple(self.flows.values())))

    @property
    def cpu_mem_rate(self) -> float:
        """Total CPU-memory traffic (up + down), Gbps."""
        return self.flows[FlowKind.CPU_MEM_UP] + self.flows[FlowKind.CPU_MEM_DOWN]

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "cpu_demand_ghz": self.cpu_demand / 10,
            "mem_demand_gb": self.mem_demand / 10,
            "cpu_demand_deci": self.cpu_demand,
            "mem_demand_deci": self.mem_demand,
            "flows_gbps": {k.value: v for k, v in self.flows.items()},
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "Workload":
        return cls(
            id=int(data["id"]),
            cpu_demand=int(data["cpu_demand_deci"]),
            mem_demand=int(data["mem_demand_deci"]),
            flows={FlowKind(k): v for k, v in data["flows_gbps"].items()},
        )


@dataclass(frozen=True)
class Module:
    id: str
    spec: ResourceSpec
    index: int  # position among modules of the same kind
    rack: int
    board: Optional[int] = None

    @property
    def kind(self) -> ResourceKind:
        return self.spec.kind


@dataclass(frozen=True)
class Location:
    module_id: str
    rack: int
    board: Optional[int] = None


def module_id(kind: ResourceKind, index: int) -> str:
    return f"{kind.value}{index}"


@dataclass(frozen=True)
class Topology:
    kind: ArchitectureKind
    modules: tuple[Module, ...]
    racks: tuple[int, ...]
    epb: EpbTable = DEFAULT_EPB
    _by_id: Mapping[str, Module] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "modules", tuple(self.modules))
        object.__setattr__(self, "racks", tuple(self.racks))
        by_id = {}
        for m in self.modules:
            if m.id in by_id:
                raise TopologyError(f"duplicate module id {m.id!r}")
            by_id[m.id] = m
        object.__setattr__(self, "_by_id", MappingProxyType(by_id))
        self.validate()

    def validate(self) -> None:
        """Check every structural invariant of the architecture kind."""
        racks = set(self.racks)
        if len(racks) != len(self.racks):
            raise TopologyError("rack ids must be unique")
        for kind in ResourceKind:
            idx = [m.index for m in self.modules if m.kind is kind]
            if sorted(idx) != list(range(len(idx))):
                raise TopologyError(f"{kind.value} module indices must be 0..n-1")
        for m in self.modules:
            if m.rack not in racks:
                raise TopologyError(f"module {m.id} sits in unknown rack {m.rack}")

        if self.kind is ArchitectureKind.TRADITIONAL:
            boards: dict[int, list[Module]] = {}
            for m in self.modules:
                if m.board is None:
                    raise TopologyError(f"traditional module {m.id} has no board")
                boards.setdefault(m.board, []).append(m)
            for b, members in boards.items():
                kinds = sorted(m.kind.value for m in members)
                if kinds != ["cpu", "mem"]:
                    raise TopologyError(f"server {b} must hold exactly one CPU and one memory module, holds {kinds}")
                if members[0].rack != members[1].rack:
                    raise TopologyError(f"server {b} spans two racks")
            return

        for m in self.modules:
            if m.board is not None:
                raise TopologyError(f"disaggregated module {m.id} must not sit on a board")
        per_rack = {r: set() for r in self.racks}
        for m in self.modules:
            per_rack[m.rack].add(m.kind)
        for r, kinds in per_rack.items():
            if self.kind is ArchitectureKind.RACK_SCALE and kinds != set(ResourceKind):
                raise TopologyError(f"rack-scale rack {r} must hold both CPU and memory modules")
            if self.kind is ArchitectureKind.POD_SCALE and len(kinds) != 1:
                raise TopologyError(f"pod-scale rack {r} must hold modules of exactly one kind")

    def module(self, module_id: str) -> Module:
        try:
            return self._by_id[module_id]
        except KeyError:
            raise KeyError(f"unknown module {module_id!r}") from None

    def __contains__(self, module_id: str) -> bool:
        return module_id in self._by_id

    def of_kind(self, kind: ResourceKind) -> tuple[Module, ...]:
        return tuple(sorted((m for m in self.modules if m.kind is kind), key=lambda m: m.index))

    @property
    def cpus(self) -> tuple[Module, ...]:
        return self.of_kind(ResourceKind.CPU)

    @property
    def mems(self) -> tuple[Module, ...]:
        return self.of_kind(ResourceKind.MEM)

    @property
    def boards(self) -> tuple[int, ...]:
        return tuple(sorted({m.board for m in self.modules if m.board is not None}))

    def partner(self, module_id: str) -> Module:
        """The other module on the same server (traditional topologies only)."""
        m = self.module(module_id)
        if m.board is None:
            raise TopologyError(f"module {module_id} is not on a server board")
        for other in self.modules:
            if other.board == m.board and other.id != m.id:
                return other
        raise TopologyError(f"server {m.board} has no partner for {module_id}")

    def scaled(self, k: float) -> "Topology":
        """Same layout with every peak power and every epb entry multiplied by k."""
        mods = tuple(Module(m.id, m.spec.scaled(k), m.index, m.rack, m.board) for m in self.modules)
        return Topology(self.kind, mods, self.racks, self.epb.scaled(k))


def build_topology(
    kind: ArchitectureKind,
    n_cpu: int,
    n_mem: int,
    racks: int,
    cpu_spec: ResourceSpec = CPU_SPEC,
    mem_spec: ResourceSpec = MEM_SPEC,
    epb: EpbTable = DEFAULT_EPB,
) -> Topology:
    """Lay out modules for one of the three architectures.

    Traditional: server ``s`` pairs ``cpu<s>`` with ``mem<s>`` and sits in rack
    ``s mod racks``. Rack-scale: module ``i`` of each kind goes to rack
    ``i mod racks``. Pod-scale: the first ``ceil(racks/2)`` racks hold CPUs,
    the rest hold memory, each kind split round-robin over its racks.
    """
    kind = ArchitectureKind(kind)
    if cpu_spec.kind is not ResourceKind.CPU or mem_spec.kind is not ResourceKind.MEM:
        raise TopologyError("cpu_spec/mem_spec kinds are swapped")
    if n_cpu < 1 or n_mem < 1:
        raise TopologyError(f"need at least one CPU and one memory module (got {n_cpu} CPU, {n_mem} MEM)")
    if racks < 1:
        raise TopologyError(f"need at least one rack (got {racks})")

    modules: list[Module] = []
    if kind is ArchitectureKind.TRADITIONAL:
        if n_cpu != n_mem:
            raise TopologyError(f"traditional servers pair one CPU with one memory module: n_cpu={n_cpu} != n_mem={n_mem}")
        if racks > n_cpu:
            raise TopologyError(f"{racks} racks cannot all hold one of {n_cpu} servers")
        for s in range(n_cpu):
            r = s % racks
            modules.append(Module(module_id(ResourceKind.CPU, s), cpu_spec, s, r, s))
            modules.append(Module(module_id(ResourceKind.MEM, s), mem_spec, s, r, s))
    elif kind is ArchitectureKind.RACK_SCALE:
        if n_cpu % racks or n_mem % racks:
            raise TopologyError(f"rack-scale layout needs racks ({racks}) to divide both n_cpu ({n_cpu}) and n_mem ({n_mem})")
        for i in range(n_cpu):
            modules.append(Module(module_id(ResourceKind.CPU, i), cpu_spec, i, i % racks))
        for i in range(n_mem):
            modules.append(Module(module_id(ResourceKind.MEM, i), mem_spec, i, i % racks))
    else:
        if racks < 2:
            raise TopologyError(f"pod-scale layout needs at least 2 racks (one CPU, one memory), got {racks}")
        cpu_racks = (racks + 1) // 2
        mem_racks = racks - cpu_racks
        if n_cpu < cpu_racks or n_mem < mem_racks:
            raise TopologyError(f"pod-scale layout leaves a rack empty: {cpu_racks} CPU racks for {n_cpu} CPUs, {mem_racks} memory racks for {n_mem} modules")
        for i in range(n_cpu):
            modules.append(Module(module_id(ResourceKind.CPU, i), cpu_spec, i, i % cpu_racks))
        for i in range(n_mem):
            modules.append(Module(module_id(ResourceKind.MEM, i), mem_spec, i, cpu_racks + i % mem_racks))
    return Topology(kind, tuple(modules), tuple(range(racks)), epb)


def locate(topology: Topology, module_id: str) -> Location:
    m = topology.module(module_id)
    return Location(m.id, m.rack, m.board)


@dataclass(frozen=True)
class Placement:
    """Assignment of each workload to one CPU module and one memory module."""

    assignments: Mapping[int, tuple[str, str]]

    def __post_init__(self) -> None:
        ordered = {int(w): (str(c), str(m)) for w, (c, m) in sorted(self.assignments.items())}
        object.__setattr__(self, "assignments", MappingProxyType(ordered))

    def __getitem__(self, workload_id: int) -> tuple[str, str]:
        return self.assignments[workload_id]

    def __len__(self) -> int:
        return len(self.assignments)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Placement) and dict(self.assignments) == dict(other.assignments)

    def __hash__(self) -> int:
        return hash(tuple(self.assignments.items()))

    def items(self) -> Iterable[tuple[int, tuple[str, str]]]:
        return self.assignments.items()

    def to_dict(self) -> dict:
        return {str(w): {"cpu": c, "mem": m} for w, (c, m) in self.assignments.items()}

    @classmethod
    def from_dict(cls, data: Mapping) -> "Placement":
        return cls({int(w): (v["cpu"], v["mem"]) for w, v in data.items()})
