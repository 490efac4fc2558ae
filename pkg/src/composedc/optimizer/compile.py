"""Flatten a MilpInstance into the plain arrays the search kernels consume."""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..domain import ArchitectureKind, Workload
from ..fabric import io_energy
from .bounds import l1_bound, min_bins
from .model import MilpInstance

FORBIDDEN = -1.0


@dataclass
class KernelInput:
    n_w: int
    n_c: int
    n_m: int
    n_racks: int
    paired: bool  # traditional: a CPU choice fixes the memory module
    cd: list[int]  # demands in search (canonical) order
    md: list[int]
    rate: list[float]  # CPU-memory Gbps
    ccap: list[int]
    cidle: list[float]
    ccoef: list[float]  # W per deci-unit of load
    cgroup: list[int]  # interchangeable group of each module
    cgpos: list[int]  # position inside its group
    crack: list[int]
    mcap: list[int]
    midle: list[float]
    mcoef: list[float]
    mgroup: list[int]
    mgpos: list[int]
    mrack: list[int]
    n_cgroups: int
    n_mgroups: int
    rack_class: list[int]  # racks with equal class are interchangeable
    rack_mcount: list[int]  # memory modules per rack
    pair: list[int]  # paired memory module per CPU, or -1
    energy: list[float]  # [c * n_m + m], W per Gbps; FORBIDDEN marks disallowed pairs
    min_energy_c: list[float]  # cheapest allowed energy from each CPU
    morder: list[int]  # memory-phase order: positions sorted by descending memory demand
    rack_penalty: bool  # rack-scale: leaving the CPU's rack costs extra
    pen: list[float]  # per position: extra W if its memory leaves the CPU's rack
    suffix_fixed: list[float]  # paired mode: load + network lower bound of positions k..end
    suffix_cpu_load: list[float]
    mem_fixed_total: float  # memory load + network lower bound over all workloads
    cbins: int  # lower bound on active CPU modules
    mbins: int
    cmaxcap: int
    mmaxcap: int
    cidle_min: float
    midle_min: float
    mcoef_min: float
    io_constant: float  # placement-independent IO power, left out of kernel costs
    # Rack-level search: used when all modules of a kind inside a rack are interchangeable.
    pooled: bool
    rack_cpus: list[list[int]]  # module indices per rack, in index order
    rack_mems: list[list[int]]
    rccap: list[int]  # per-rack module spec (0 when the rack has none of that kind)
    rcidle: list[float]
    rccoef: list[float]
    rmcap: list[int]
    rmidle: list[float]
    rmcoef: list[float]
    renergy: list[float]  # [a * n_racks + b]: CPU rack a to memory rack b, W per Gbps
    rmin_energy: list[float]  # per CPU rack
    mem_rack_order: list[list[int]]  # memory racks tried for each CPU rack, cheapest first
    rack_symmetry: bool  # racks of one class are interchangeable


def _groups(keys: list) -> tuple[list[int], list[int], int]:
    ids: dict = {}
    group, pos, counts = [], [], []
    for k in keys:
        if k not in ids:
            ids[k] = len(ids)
            counts.append(0)
        g = ids[k]
        group.append(g)
        pos.append(counts[g])
        counts[g] += 1
    return group, pos, len(ids)


def _bins_bound(sizes: list[int], caps: list[int]) -> int:
    if not sizes:
        return 0
    if len(set(caps)) == 1:
        return min_bins(sizes, caps[0])
    return l1_bound(sizes, max(caps))


def compile_instance(instance: MilpInstance, order: list[Workload]) -> KernelInput:
    topo = instance.topology
    cpus, mems = topo.cpus, topo.mems
    paired = not topo.kind.disaggregated
    n_c, n_m, n_w = len(cpus), len(mems), len(order)
    racks = list(topo.racks)
    rack_pos = {r: i for i, r in enumerate(racks)}

    energy = []
    for c in cpus:
        for m in mems:
            energy.append(instance.pair_energy(c.id, m.id) if instance.pair_allowed(c.id, m.id) else FORBIDDEN)
    rows = [tuple(energy[i * n_m : (i + 1) * n_m]) for i in range(n_c)]
    cols = [tuple(energy[j::n_m]) for j in range(n_m)]

    # Modules are interchangeable when they share rack, spec and fabric costs.
    pair = [-1] * n_c
    if paired:
        mem_index = {m.board: i for i, m in enumerate(mems)}
        pair = [mem_index[c.board] for c in cpus]
        ckeys = [(c.rack, c.spec, mems[pair[i]].spec, energy[i * n_m + pair[i]]) for i, c in enumerate(cpus)]
    else:
        ckeys = [(c.rack, c.spec, rows[i]) for i, c in enumerate(cpus)]
    mkeys = [(m.rack, m.spec, cols[j]) for j, m in enumerate(mems)]
    cgroup, cgpos, n_cg = _groups(ckeys)
    mgroup, mgpos, n_mg = _groups(mkeys)

    signature: dict[int, list] = {r: [] for r in racks}
    for m in topo.modules:
        signature[m.rack].append((m.kind.value, m.spec.capacity, m.spec.peak_power, m.spec.dynamic_range))
    class_ids: dict = {}
    rack_class = []
    for r in racks:
        key = tuple(sorted(signature[r]))
        rack_class.append(class_ids.setdefault(key, len(class_ids)))

    min_energy_c = []
    for i in range(n_c):
        row = [e for e in energy[i * n_m : (i + 1) * n_m] if e != FORBIDDEN]
        min_energy_c.append(min(row) if row else math.inf)
    allowed = [e for e in energy if e != FORBIDDEN]
    min_e = min(allowed) if allowed else 0.0

    ccoef = [c.spec.dynamic_power / c.spec.capacity for c in cpus]
    mcoef = [m.spec.dynamic_power / m.spec.capacity for m in mems]
    min_cc, min_mc = min(ccoef), min(mcoef)

    suffix = [0.0] * (n_w + 1)
    suffix_cpu = [0.0] * (n_w + 1)
    for k in range(n_w - 1, -1, -1):
        w = order[k]
        suffix[k] = suffix[k + 1] + (min_cc * w.cpu_demand + min_mc * w.mem_demand + w.cpu_mem_rate * min_e)
        suffix_cpu[k] = suffix_cpu[k + 1] + min_cc * w.cpu_demand
    mem_fixed = 0.0
    for w in order:
        mem_fixed += min_mc * w.mem_demand + w.cpu_mem_rate * min_e

    # Rack-scale with a cheaper backplane than inter-rack fabric: every workload
    # whose memory leaves its CPU's rack pays at least rate * (cross - local).
    rack_penalty = False
    pen = [0.0] * n_w
    if topo.kind is ArchitectureKind.RACK_SCALE and len(racks) > 1:
        local = [energy[i * n_m + j] for i, c in enumerate(cpus) for j, m in enumerate(mems) if c.rack == m.rack]
        cross = [energy[i * n_m + j] for i, c in enumerate(cpus) for j, m in enumerate(mems) if c.rack != m.rack]
        cross_allowed = [e for e in cross if e != FORBIDDEN]
        gap = (min(cross_allowed) if cross_allowed else math.inf) - max(local)
        if gap > 0 and min(local) == max(local) == min_e:
            rack_penalty = True
            pen = [w.cpu_mem_rate * gap if w.cpu_mem_rate > 0 else 0.0 for w in order]

    morder = sorted(range(n_w), key=lambda k: (-order[k].mem_demand, k))
    mcaps = [m.spec.capacity for m in mems]
    ccaps = [c.spec.capacity for c in cpus]
    io_rate = 0.0
    for w in order:
        io_rate += sum(v for k, v in w.flows.items() if not k.is_cpu_mem)

    pooled = not paired
    rack_cpus = [[i for i, c in enumerate(cpus) if c.rack == r] for r in racks]
    rack_mems = [[j for j, m in enumerate(mems) if m.rack == r] for r in racks]
    for r in range(len(racks)):
        if len({cgroup[i] for i in rack_cpus[r]}) > 1 or len({mgroup[j] for j in rack_mems[r]}) > 1:
            pooled = False
    n_r = len(racks)

    def spec_of(idx: list[int], mods) -> tuple:
        if not idx:
            return 0, 0.0, 0.0
        sp = mods[idx[0]].spec
        return sp.capacity, sp.idle_power, sp.dynamic_power / sp.capacity

    rc = [spec_of(rack_cpus[r], cpus) for r in range(n_r)]
    rm = [spec_of(rack_mems[r], mems) for r in range(n_r)]
    renergy = [FORBIDDEN] * (n_r * n_r)
    for a in range(n_r):
        for b in range(n_r):
            if rack_cpus[a] and rack_mems[b]:
                renergy[a * n_r + b] = energy[rack_cpus[a][0] * n_m + rack_mems[b][0]]
    rmin_energy = []
    mem_rack_order = []
    for a in range(n_r):
        ok = [b for b in range(n_r) if renergy[a * n_r + b] != FORBIDDEN]
        rmin_energy.append(min((renergy[a * n_r + b] for b in ok), default=math.inf))
        mem_rack_order.append(sorted(ok, key=lambda b: (renergy[a * n_r + b], b)))
    # Swapping two racks of one class must leave every rack-to-rack cost unchanged.
    rack_symmetry = True
    for a in range(n_r):
        for b in range(n_r):
            for a2 in range(n_r):
                for b2 in range(n_r):
                    same = (a == b) == (a2 == b2) and rack_class[a] == rack_class[a2] and rack_class[b] == rack_class[b2]
                    if same and renergy[a * n_r + b] != renergy[a2 * n_r + b2]:
                        rack_symmetry = False

    return KernelInput(
        n_w=n_w,
        n_c=n_c,
        n_m=n_m,
        n_racks=len(racks),
        paired=paired,
        cd=[w.cpu_demand for w in order],
        md=[w.mem_demand for w in order],
        rate=[w.cpu_mem_rate for w in order],
        ccap=ccaps,
        cidle=[c.spec.idle_power for c in cpus],
        ccoef=ccoef,
        cgroup=cgroup,
        cgpos=cgpos,
        crack=[rack_pos[c.rack] for c in cpus],
        mcap=mcaps,
        midle=[m.spec.idle_power for m in mems],
        mcoef=mcoef,
        mgroup=mgroup,
        mgpos=mgpos,
        mrack=[rack_pos[m.rack] for m in mems],
        n_cgroups=n_cg,
        n_mgroups=n_mg,
        rack_class=rack_class,
        rack_mcount=[sum(1 for m in mems if m.rack == r) for r in racks],
        pair=pair,
        energy=energy,
        min_energy_c=min_energy_c,
        morder=morder,
        rack_penalty=rack_penalty and len(set(mcaps)) == 1,
        pen=pen,
        suffix_fixed=suffix,
        suffix_cpu_load=suffix_cpu,
        mem_fixed_total=mem_fixed,
        cbins=_bins_bound([w.cpu_demand for w in order], ccaps),
        mbins=_bins_bound([w.mem_demand for w in order], mcaps),
        cmaxcap=max(ccaps),
        mmaxcap=max(mcaps),
        cidle_min=min(c.spec.idle_power for c in cpus),
        midle_min=min(m.spec.idle_power for m in mems),
        mcoef_min=min_mc,
        io_constant=io_rate * io_energy(topo, instance.policy),
        pooled=pooled,
        rack_cpus=rack_cpus,
        rack_mems=rack_mems,
        rccap=[x[0] for x in rc],
        rcidle=[x[1] for x in rc],
        rccoef=[x[2] for x in rc],
        rmcap=[x[0] for x in rm],
        rmidle=[x[1] for x in rm],
        rmcoef=[x[2] for x in rm],
        renergy=renergy,
        rmin_energy=rmin_energy,
        mem_rack_order=mem_rack_order,
        rack_symmetry=rack_symmetry,
    )
