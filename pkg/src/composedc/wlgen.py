"""Seed-reproducible workload generation on a deci-unit lattice.

The generator is SplitMix64, written out so that the same seed gives the
same workloads bit for bit in any language.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .domain import FlowKind, Workload

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15

TABLE2_FLOWS = {
    FlowKind.CPU_MEM_UP: 120.0,
    FlowKind.CPU_MEM_DOWN: 100.0,
    FlowKind.CPU_IO_UP: 2.0,
    FlowKind.CPU_IO_DOWN: 1.0,
    FlowKind.MEM_IO_UP: 2.0,
    FlowKind.MEM_IO_DOWN: 1.0,
}


def splitmix64_next(state: int) -> tuple[int, int]:
    """Advance the state and return ``(new_state, output)``."""
    state = (state + GOLDEN_GAMMA) & MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return state, z ^ (z >> 31)


def lattice_value(raw: int, lo: int, hi: int, granularity: int) -> int:
    """Map a raw 64-bit draw onto ``{lo, lo+g, ..., hi}`` by modulo (bias < 2**-59 for small lattices)."""
    if granularity <= 0 or hi < lo or (hi - lo) % granularity:
        raise ValueError(f"invalid lattice lo={lo} hi={hi} granularity={granularity}")
    n = (hi - lo) // granularity + 1
    return lo + (raw % n) * granularity


def sample_uniform_fixed(state: int, lo: int, hi: int, granularity: int) -> tuple[int, int]:
    if granularity <= 0 or hi < lo or (hi - lo) % granularity:
        raise ValueError(f"invalid lattice lo={lo} hi={hi} granularity={granularity}")
    state, raw = splitmix64_next(state)
    return state, lattice_value(raw, lo, hi, granularity)


@dataclass(frozen=True)
class WorkloadProfile:
    cpu_range: tuple[int, int] = (10, 30)  # deci-GHz
    mem_range: tuple[int, int] = (50, 80)  # deci-GB
    cpu_step: int = 1
    mem_step: int = 10
    fixed_flows: Mapping[FlowKind, float] = field(default_factory=lambda: dict(TABLE2_FLOWS))

    def __post_init__(self) -> None:
        for (lo, hi), step, name in ((self.cpu_range, self.cpu_step, "cpu"), (self.mem_range, self.mem_step, "mem")):
            if lo <= 0 or lo > hi or step <= 0 or (hi - lo) % step:
                raise ValueError(f"{name} range {lo}..{hi} with step {step} is not a valid lattice")
        flows = {FlowKind(k): float(v) for k, v in self.fixed_flows.items()}
        if set(flows) != set(FlowKind) or any(v < 0 for v in flows.values()):
            raise ValueError("fixed_flows must give a non-negative rate for all six flow kinds")
        object.__setattr__(self, "fixed_flows", {k: flows[k] for k in FlowKind})

    def to_dict(self) -> dict:
        return {
            "cpu_range_deci": list(self.cpu_range),
            "mem_range_deci": list(self.mem_range),
            "cpu_step_deci": self.cpu_step,
            "mem_step_deci": self.mem_step,
            "fixed_flows_gbps": {k.value: v for k, v in self.fixed_flows.items()},
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "WorkloadProfile":
        base = cls()
        return cls(
            cpu_range=tuple(data.get("cpu_range_deci", base.cpu_range)),
            mem_range=tuple(data.get("mem_range_deci", base.mem_range)),
            cpu_step=int(data.get("cpu_step_deci", base.cpu_step)),
            mem_step=int(data.get("mem_step_deci", base.mem_step)),
            fixed_flows={FlowKind(k): v for k, v in data.get("fixed_flows_gbps", {k.value: v for k, v in base.fixed_flows.items()}).items()},
        )


DEFAULT_PROFILE = WorkloadProfile()


def generate_workloads(seed: int, n: int, profile: WorkloadProfile = DEFAULT_PROFILE) -> list[Workload]:
    """Draw ``n`` workloads from one stream: CPU demand then memory demand per workload."""
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    state = seed & MASK64
    out = []
    for i in range(n):
        state, cpu = sample_uniform_fixed(state, *profile.cpu_range, profile.cpu_step)
        state, mem = sample_uniform_fixed(state, *profile.mem_range, profile.mem_step)
        out.append(Workload(i, cpu, mem, dict(profile.fixed_flows)))
    return out
