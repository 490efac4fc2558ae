"""Pure-Python depth-first branch-and-bound kernel.

This is the reference implementation; ``_bnb_ext.pyx`` mirrors it line for
line and must return identical results (same incumbent, same node count).

Traditional servers are searched in one phase (a CPU choice fixes the
memory module). Disaggregated topologies are searched in two phases: every
workload's CPU module first, in search order, then every memory module, in
descending memory-demand order. Fixing all CPU racks before any memory
decision lets the memory bound charge the rack-crossing penalty.

When every rack holds at most one interchangeable group per kind (all
layouts from ``build_topology``), the disaggregated search branches on racks
instead of modules: a workload picks a CPU rack, then a memory rack, and
each rack's module count is its exact bin-packing minimum. The concrete
modules are assigned at the leaf by a deterministic minimum packing.
"""

from __future__ import annotations

import math
import time

from .bounds import BinTable, pack_min
from .compile import FORBIDDEN, KernelInput

TIME_CHECK_MASK = 1023
INF = math.inf


def _extra_modules(caps, loads, counts, n_mod, items, maxcap, glob, n_open) -> int:
    """Lower bound on modules that must still be opened for ``items``."""
    free = 0
    maxres = 0
    for i in range(n_mod):
        if counts[i]:
            r = caps[i] - loads[i]
            free += r
            if r > maxres:
                maxres = r
    rem = 0
    sbig = 0
    nhalf = 0
    for d in items:
        rem += d
        if d > maxres:
            sbig += d
            if 2 * d > maxcap:
                nhalf += 1
    need = glob - n_open
    vol = rem - free
    if vol > 0:
        b = (vol + maxcap - 1) // maxcap
        if b > need:
            need = b
    b = (sbig + maxcap - 1) // maxcap
    if b > need:
        need = b
    if nhalf > need:
        need = nhalf
    if need < 0:
        need = 0
    return need


def _rack_memory_bound(ki: KernelInput, need: int, demand, free, avail, rack_items, rack_pen, table=None, held=None) -> float:
    """Idle cost of ``need`` new memory modules plus the least rack-crossing penalty.

    Rack ``r`` gets ``k`` new modules; memory demand of workloads whose CPU
    sits in ``r`` beyond its free capacity must cross racks, which takes at
    least as many workloads as the largest ones covering the overflow. With a
    ``table``, the items staying local must also pack into the ``k`` new
    modules plus the ``held[r]`` already open ones (counted as empty).
    """
    cap = ki.mmaxcap
    idle = ki.midle_min
    g = [INF] * (need + 1)
    g[0] = 0.0
    for r in range(ki.n_racks):
        items = rack_items[r]
        pmin = rack_pen[r]
        h = [INF] * (need + 1)
        packed = table.drop(tuple(items)) if table is not None else None
        for k in range(avail[r] + 1):
            e = demand[r] - free[r] - cap * k
            cnt = 0
            if e > 0:
                acc = 0
                for d in items:
                    acc += d
                    cnt += 1
                    if acc >= e:
                        break
            if packed is not None:
                slots = k + (held[r] if held is not None else 0)
                while packed[cnt] > slots:
                    cnt += 1
            f = cnt * pmin if cnt else 0.0
            f += idle * k
            for j in range(need + 1):
                if g[j] == INF:
                    continue
                t = j + k
                if t > need:
                    t = need
                v = g[j] + f
                if v < h[t]:
                    h[t] = v
        g = h
    return g[need]


def search(ki: KernelInput, ub: float, eps: float, node_budget: int, time_budget: float):
    """Return ``(found, cpu_idx, mem_idx, cost, nodes, complete)`` indexed by search position."""
    if ki.pooled:
        return _search_pooled(ki, ub, eps, node_budget, time_budget)
    return _search_modules(ki, ub, eps, node_budget, time_budget)


def _search_modules(ki: KernelInput, ub: float, eps: float, node_budget: int, time_budget: float):
    n_w, n_c, n_m, n_r = ki.n_w, ki.n_c, ki.n_m, ki.n_racks
    cd, md, rate = ki.cd, ki.md, ki.rate
    ccap, cidle, ccoef, cgroup, cgpos, crack = ki.ccap, ki.cidle, ki.ccoef, ki.cgroup, ki.cgpos, ki.crack
    mcap, midle, mcoef, mgroup, mgpos, mrack = ki.mcap, ki.midle, ki.mcoef, ki.mgroup, ki.mgpos, ki.mrack
    pair, energy, min_energy_c = ki.pair, ki.energy, ki.min_energy_c
    rack_class, morder, pen = ki.rack_class, ki.morder, ki.pen

    cload = [0] * n_c
    ccount = [0] * n_c
    mload = [0] * n_m
    mcount = [0] * n_m
    copen = [0] * ki.n_cgroups
    mopen = [0] * ki.n_mgroups
    rc_open = [0] * n_r  # open CPU modules (servers when paired) per rack
    rm_open = [0] * n_r
    cur_c = [0] * n_w
    cur_m = [0] * n_w

    st = {"best": ub, "found": False, "nodes": 0, "aborted": False, "open_c": 0, "open_m": 0}
    best_c = [0] * n_w
    best_m = [0] * n_w
    deadline = time.perf_counter() + time_budget
    table = BinTable(ki.mmaxcap) if ki.rack_penalty else None

    def enter() -> bool:
        if st["aborted"]:
            return False
        st["nodes"] += 1
        if st["nodes"] > node_budget:
            st["aborted"] = True
            return False
        if (st["nodes"] & TIME_CHECK_MASK) == 0 and time.perf_counter() > deadline:
            st["aborted"] = True
            return False
        return True

    def leaf(cost: float) -> None:
        if cost < st["best"] - eps:
            st["best"] = cost
            best_c[:] = cur_c
            best_m[:] = cur_m
            st["found"] = True

    def cpu_rack_ok(r: int) -> bool:
        if rc_open[r] or not ki.rack_symmetry:
            return True
        for r2 in range(r):
            if rack_class[r2] == rack_class[r] and rc_open[r2] == 0:
                return False
        return True

    def mem_rack_ok(r: int) -> bool:
        if rm_open[r] or rc_open[r] or not ki.rack_symmetry:
            return True
        for r2 in range(r):
            if rack_class[r2] == rack_class[r] and rc_open[r2] == 0 and rm_open[r2] == 0:
                return False
        return True

    def open_cpu(c: int, d: int) -> bool:
        new_c = ccount[c] == 0
        cload[c] += d
        ccount[c] += 1
        if new_c:
            copen[cgroup[c]] += 1
            rc_open[crack[c]] += 1
            st["open_c"] += 1
        return new_c

    def close_cpu(c: int, d: int, new_c: bool) -> None:
        cload[c] -= d
        ccount[c] -= 1
        if new_c:
            copen[cgroup[c]] -= 1
            rc_open[crack[c]] -= 1
            st["open_c"] -= 1

    def open_mem(m: int, d: int) -> bool:
        new_m = mcount[m] == 0
        mload[m] += d
        mcount[m] += 1
        if new_m:
            mopen[mgroup[m]] += 1
            rm_open[mrack[m]] += 1
            st["open_m"] += 1
        return new_m

    def close_mem(m: int, d: int, new_m: bool) -> None:
        mload[m] -= d
        mcount[m] -= 1
        if new_m:
            mopen[mgroup[m]] -= 1
            rm_open[mrack[m]] -= 1
            st["open_m"] -= 1

    # --- traditional servers: one phase ------------------------------------

    def rec_paired(k: int, cost: float) -> None:
        if not enter():
            return
        if k == n_w:
            leaf(cost)
            return
        dc = _extra_modules(ccap, cload, ccount, n_c, cd[k:], ki.cmaxcap, ki.cbins, st["open_c"])
        dm = _extra_modules(mcap, mload, mcount, n_m, md[k:], ki.mmaxcap, ki.mbins, st["open_m"])
        if dm > dc:
            dc = dm
        bound = cost + ki.suffix_fixed[k] + (ki.cidle_min + ki.midle_min) * dc
        if bound >= st["best"] - eps:
            return
        dw = cd[k]
        mw = md[k]
        tried = set()
        for c in range(n_c):
            if ccount[c] == 0 and (cgpos[c] != copen[cgroup[c]] or not cpu_rack_ok(crack[c])):
                continue
            m = pair[c]
            if cload[c] + dw > ccap[c] or mload[m] + mw > mcap[m]:
                continue
            if ccount[c]:
                key = (cgroup[c], cload[c], mload[m])
                if key in tried:
                    continue
                tried.add(key)
            dcost = 0.0
            if ccount[c] == 0:
                dcost += cidle[c]
            dcost += ccoef[c] * dw
            if mcount[m] == 0:
                dcost += midle[m]
            dcost += mcoef[m] * mw
            dcost += rate[k] * energy[c * n_m + m]
            new_c = open_cpu(c, dw)
            new_m = open_mem(m, mw)
            cur_c[k] = c
            cur_m[k] = m
            rec_paired(k + 1, cost + dcost)
            close_mem(m, mw, new_m)
            close_cpu(c, dw, new_c)
            if st["aborted"]:
                return

    # --- disaggregated: CPU phase then memory phase ------------------------

    def memory_bound_cpu_phase(k: int) -> float:
        if not ki.rack_penalty:
            return ki.midle_min * ki.mbins
        demand = [0] * n_r
        items = [[] for _ in range(n_r)]
        rpen = [INF] * n_r
        for p in morder:
            if p < k:
                r = crack[cur_c[p]]
                demand[r] += md[p]
                items[r].append(md[p])
                if pen[p] < rpen[r]:
                    rpen[r] = pen[p]
        return _rack_memory_bound(ki, ki.mbins, demand, [0] * n_r, ki.rack_mcount, items, rpen, table)

    def rec_cpu(k: int, cost: float) -> None:
        if not enter():
            return
        if k == n_w:
            rec_mem(0, cost)
            return
        dc = _extra_modules(ccap, cload, ccount, n_c, cd[k:], ki.cmaxcap, ki.cbins, st["open_c"])
        bound = cost + ki.suffix_cpu_load[k] + ki.cidle_min * dc + ki.mem_fixed_total + memory_bound_cpu_phase(k)
        if bound >= st["best"] - eps:
            return
        dw = cd[k]
        tried = set()
        for c in range(n_c):
            if ccount[c] == 0 and (cgpos[c] != copen[cgroup[c]] or not cpu_rack_ok(crack[c])):
                continue
            if cload[c] + dw > ccap[c] or min_energy_c[c] == INF:
                continue
            if ccount[c]:
                key = (cgroup[c], cload[c])
                if key in tried:
                    continue
                tried.add(key)
            dcost = 0.0
            if ccount[c] == 0:
                dcost += cidle[c]
            dcost += ccoef[c] * dw
            new_c = open_cpu(c, dw)
            cur_c[k] = c
            rec_cpu(k + 1, cost + dcost)
            close_cpu(c, dw, new_c)
            if st["aborted"]:
                return

    def rec_mem(j: int, cost: float) -> None:
        if j > 0 and not enter():
            return
        if j == n_w:
            leaf(cost)
            return
        rest = 0.0
        items = []
        for q in range(j, n_w):
            p = morder[q]
            rest += ki.mcoef_min * md[p] + rate[p] * min_energy_c[cur_c[p]]
            items.append(md[p])
        need = _extra_modules(mcap, mload, mcount, n_m, items, ki.mmaxcap, ki.mbins, st["open_m"])
        if ki.rack_penalty:
            demand = [0] * n_r
            free = [0] * n_r
            avail = list(ki.rack_mcount)
            ritems = [[] for _ in range(n_r)]
            rpen = [INF] * n_r
            held = [0] * n_r
            for m in range(n_m):
                if mcount[m]:
                    free[mrack[m]] += mcap[m] - mload[m]
                    avail[mrack[m]] -= 1
                    held[mrack[m]] += 1
            for q in range(j, n_w):
                p = morder[q]
                r = crack[cur_c[p]]
                demand[r] += md[p]
                ritems[r].append(md[p])
                if pen[p] < rpen[r]:
                    rpen[r] = pen[p]
            idle = _rack_memory_bound(ki, need, demand, free, avail, ritems, rpen, table, held)
        else:
            idle = ki.midle_min * need
        bound = cost + rest + idle
        if bound >= st["best"] - eps:
            return
        p = morder[j]
        c = cur_c[p]
        mw = md[p]
        tried = set()
        for m in range(n_m):
            e = energy[c * n_m + m]
            if e == FORBIDDEN:
                continue
            if mcount[m] == 0 and (mgpos[m] != mopen[mgroup[m]] or not mem_rack_ok(mrack[m])):
                continue
            if mload[m] + mw > mcap[m]:
                continue
            if mcount[m]:
                key = (mgroup[m], mload[m])
                if key in tried:
                    continue
                tried.add(key)
            dcost = 0.0
            if mcount[m] == 0:
                dcost += midle[m]
            dcost += mcoef[m] * mw
            dcost += rate[p] * e
            new_m = open_mem(m, mw)
            cur_m[p] = m
            rec_mem(j + 1, cost + dcost)
            close_mem(m, mw, new_m)
            if st["aborted"]:
                return

    if ki.paired:
        rec_paired(0, 0.0)
    else:
        rec_cpu(0, 0.0)
    return st["found"], list(best_c), list(best_m), st["best"], st["nodes"], not st["aborted"]


def _unpack(ki: KernelInput, rack_of, positions, sizes, rack_mods, caps) -> list[int]:
    """Turn a rack per position into a module per position with a fewest-module packing."""
    out = [0] * len(rack_of)
    for r in range(ki.n_racks):
        mine = [p for p in positions if rack_of[p] == r]
        if mine:
            where = pack_min([sizes[p] for p in mine], caps[r])
            for p, b in zip(mine, where):
                out[p] = rack_mods[r][b]
    return out


def _search_pooled(ki: KernelInput, ub: float, eps: float, node_budget: int, time_budget: float):
    """Branch on the rack of each workload's CPU, then on the rack of its memory.

    Within a rack all modules of a kind are interchangeable and cost is
    linear in load, so a rack's cheapest packing is a fewest-module packing;
    the exact count comes from a memoised bin-packing search.
    """
    n_w, n_r = ki.n_w, ki.n_racks
    cd, md, rate, morder, pen = ki.cd, ki.md, ki.rate, ki.morder, ki.pen
    rack_cpus, rack_mems, rack_class = ki.rack_cpus, ki.rack_mems, ki.rack_class
    rccap, rcidle, rccoef = ki.rccap, ki.rcidle, ki.rccoef
    rmcap, rmidle, rmcoef = ki.rmcap, ki.rmidle, ki.rmcoef
    renergy, rmin_energy = ki.renergy, ki.rmin_energy

    tables: dict[int, BinTable] = {}
    for cap in rccap + rmcap:
        if cap and cap not in tables:
            tables[cap] = BinTable(cap)
    ctab = [tables.get(rccap[r]) for r in range(n_r)]
    mtab = [tables.get(rmcap[r]) for r in range(n_r)]
    drop = tables[ki.mmaxcap] if ki.rack_penalty else None

    citems = [()] * n_r  # descending sizes placed in each rack
    mitems = [()] * n_r
    cb = [0] * n_r  # modules each rack needs for its items
    mb = [0] * n_r
    cv = [0] * n_r
    mv = [0] * n_r
    crack_of = [0] * n_w
    mrack_of = [0] * n_w
    best_c = [0] * n_w
    best_m = [0] * n_w
    suffix_cd = [0] * (n_w + 1)
    for k in range(n_w - 1, -1, -1):
        suffix_cd[k] = suffix_cd[k + 1] + cd[k]

    st = {"best": ub, "found": False, "nodes": 0, "aborted": False}
    deadline = time.perf_counter() + time_budget

    def enter() -> bool:
        if st["aborted"]:
            return False
        st["nodes"] += 1
        if st["nodes"] > node_budget:
            st["aborted"] = True
            return False
        if (st["nodes"] & TIME_CHECK_MASK) == 0 and time.perf_counter() > deadline:
            st["aborted"] = True
            return False
        return True

    def untouched_twin_below(r: int, mem_phase: bool) -> bool:
        if not ki.rack_symmetry:
            return False
        for r2 in range(r):
            if rack_class[r2] == rack_class[r] and not citems[r2] and not (mem_phase and mitems[r2]):
                return True
        return False

    def extra_bins(vol_left: int, caps, counts, vols, maxcap: int, glob: int) -> int:
        slack = 0
        used = 0
        for r in range(n_r):
            slack += caps[r] * counts[r] - vols[r]
            used += counts[r]
        need = glob - used
        over = vol_left - slack
        if over > 0:
            b = (over + maxcap - 1) // maxcap
            if b > need:
                need = b
        return need if need > 0 else 0

    def rec_cpu(k: int, cost: float) -> None:
        if not enter():
            return
        if k == n_w:
            rec_mem(0, cost)
            return
        extra = extra_bins(suffix_cd[k], rccap, cb, cv, ki.cmaxcap, ki.cbins)
        if ki.rack_penalty:
            demand = [0] * n_r
            items = [[] for _ in range(n_r)]
            rpen = [INF] * n_r
            for p in morder:
                if p < k:
                    r = crack_of[p]
                    demand[r] += md[p]
                    items[r].append(md[p])
                    if pen[p] < rpen[r]:
                        rpen[r] = pen[p]
            avail = [len(rack_mems[r]) for r in range(n_r)]
            mem_lb = _rack_memory_bound(ki, ki.mbins, demand, [0] * n_r, avail, items, rpen, drop)
        else:
            mem_lb = ki.midle_min * ki.mbins
        bound = cost + ki.suffix_cpu_load[k] + ki.cidle_min * extra + ki.mem_fixed_total + mem_lb
        if bound >= st["best"] - eps:
            return
        d = cd[k]
        for r in range(n_r):
            if not rack_cpus[r] or rccap[r] < d or rmin_energy[r] == INF:
                continue
            if not citems[r] and untouched_twin_below(r, False):
                continue
            grown = citems[r] + (d,)
            b = ctab[r].count(grown)
            if b > len(rack_cpus[r]):
                continue
            dcost = rcidle[r] * (b - cb[r]) + rccoef[r] * d
            old_items, old_b = citems[r], cb[r]
            citems[r], cb[r] = grown, b
            cv[r] += d
            crack_of[k] = r
            rec_cpu(k + 1, cost + dcost)
            citems[r], cb[r] = old_items, old_b
            cv[r] -= d
            if st["aborted"]:
                return

    def rec_mem(j: int, cost: float) -> None:
        if j > 0 and not enter():
            return
        if j == n_w:
            if cost < st["best"] - eps:
                st["best"] = cost
                best_c[:] = crack_of
                best_m[:] = mrack_of
                st["found"] = True
            return
        rest = 0.0
        vol_left = 0
        for q in range(j, n_w):
            p = morder[q]
            rest += ki.mcoef_min * md[p] + rate[p] * rmin_energy[crack_of[p]]
            vol_left += md[p]
        extra = extra_bins(vol_left, rmcap, mb, mv, ki.mmaxcap, ki.mbins)
        if ki.rack_penalty:
            demand = [0] * n_r
            free = [0] * n_r
            avail = [0] * n_r
            items = [[] for _ in range(n_r)]
            rpen = [INF] * n_r
            for r in range(n_r):
                free[r] = rmcap[r] * mb[r] - mv[r]
                avail[r] = len(rack_mems[r]) - mb[r]
            for q in range(j, n_w):
                p = morder[q]
                r = crack_of[p]
                demand[r] += md[p]
                items[r].append(md[p])
                if pen[p] < rpen[r]:
                    rpen[r] = pen[p]
            idle = _rack_memory_bound(ki, extra, demand, free, avail, items, rpen, drop, mb)
        else:
            idle = ki.midle_min * extra
        if cost + rest + idle >= st["best"] - eps:
            return
        p = morder[j]
        a = crack_of[p]
        d = md[p]
        for b in ki.mem_rack_order[a]:
            if rmcap[b] < d:
                continue
            if not mitems[b] and not citems[b] and untouched_twin_below(b, True):
                continue
            grown = mitems[b] + (d,)
            nb = mtab[b].count(grown)
            if nb > len(rack_mems[b]):
                continue
            dcost = rmidle[b] * (nb - mb[b]) + rmcoef[b] * d + rate[p] * renergy[a * n_r + b]
            old_items, old_b = mitems[b], mb[b]
            mitems[b], mb[b] = grown, nb
            mv[b] += d
            mrack_of[p] = b
            rec_mem(j + 1, cost + dcost)
            mitems[b], mb[b] = old_items, old_b
            mv[b] -= d
            if st["aborted"]:
                return

    rec_cpu(0, 0.0)
    if not st["found"]:
        return False, [0] * n_w, [0] * n_w, st["best"], st["nodes"], not st["aborted"]
    cpu_idx = _unpack(ki, best_c, list(range(n_w)), cd, rack_cpus, rccap)
    mem_idx = _unpack(ki, best_m, morder, md, rack_mems, rmcap)
    return True, cpu_idx, mem_idx, st["best"], st["nodes"], not st["aborted"]
