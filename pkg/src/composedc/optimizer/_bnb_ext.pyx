# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled mirror of ``_bnb_py``.

Same branching order, same bounds, same floating-point evaluation order, so
both kernels return the same incumbent and the same node count. Keep the two
files in step.
"""

from cpython.mem cimport PyMem_Free, PyMem_Malloc
from libc.string cimport memset

import time

from .bounds import l2_bound, pack_min

cdef double INF = float("inf")
cdef double FORBIDDEN = -1.0
cdef long long TIME_CHECK_MASK = 1023


cdef long long* _ialloc(Py_ssize_t n) except NULL:
    cdef long long* p = <long long*> PyMem_Malloc((n if n > 0 else 1) * sizeof(long long))
    if p == NULL:
        raise MemoryError()
    memset(p, 0, (n if n > 0 else 1) * sizeof(long long))
    return p


cdef double* _dalloc(Py_ssize_t n) except NULL:
    cdef double* p = <double*> PyMem_Malloc((n if n > 0 else 1) * sizeof(double))
    if p == NULL:
        raise MemoryError()
    return p


cdef long long* _icopy(list src) except NULL:
    cdef Py_ssize_t i, n = len(src)
    cdef long long* p = _ialloc(n)
    for i in range(n):
        p[i] = src[i]
    return p


cdef double* _dcopy(list src) except NULL:
    cdef Py_ssize_t i, n = len(src)
    cdef double* p = _dalloc(n)
    for i in range(n):
        p[i] = src[i]
    return p


# --- exact bin counting ----------------------------------------------------


cdef class _Fit:
    cdef long long* items
    cdef long long* suffix
    cdef long long* loads
    cdef long long n, cap, target, used
    cdef set failed

    def __cinit__(self, tuple items, long long cap):
        cdef Py_ssize_t i
        self.n = len(items)
        self.cap = cap
        self.items = _icopy(list(items))
        self.suffix = _ialloc(self.n + 1)
        self.loads = _ialloc(self.n + 1)
        for i in range(self.n - 1, -1, -1):
            self.suffix[i] = self.suffix[i + 1] + self.items[i]

    def __dealloc__(self):
        PyMem_Free(self.items)
        PyMem_Free(self.suffix)
        PyMem_Free(self.loads)

    cdef bint fits(self, long long target):
        self.target = target
        self.used = 0
        self.failed = set()
        return self.rec(0)

    cdef bint rec(self, long long i):
        cdef long long small, free, b, b2, s, l
        cdef bint dup
        if i == self.n:
            return True
        key = (i, tuple(sorted([self.loads[b] for b in range(self.used)])))
        if key in self.failed:
            return False
        small = self.items[self.n - 1]
        free = (self.target - self.used) * self.cap
        for b in range(self.used):
            l = self.loads[b]
            if self.cap - l >= small:
                free += self.cap - l
        if self.suffix[i] > free:
            self.failed.add(key)
            return False
        s = self.items[i]
        for b in range(self.used):
            if self.loads[b] + s > self.cap:
                continue
            dup = False
            for b2 in range(b):
                if self.loads[b2] == self.loads[b] and self.loads[b2] + s <= self.cap:
                    dup = True
                    break
            if dup:
                continue
            self.loads[b] += s
            if self.rec(i + 1):
                return True
            self.loads[b] -= s
        if self.used < self.target:
            self.loads[self.used] = s
            self.used += 1
            if self.rec(i + 1):
                return True
            self.used -= 1
        self.failed.add(key)
        return False


cdef long long _ffd_count(long long* items, long long n, long long cap):
    cdef long long* loads = _ialloc(n + 1)
    cdef long long used = 0, i, b
    cdef bint placed
    for i in range(n):
        placed = False
        for b in range(used):
            if loads[b] + items[i] <= cap:
                loads[b] += items[i]
                placed = True
                break
        if not placed:
            loads[used] = items[i]
            used += 1
    PyMem_Free(loads)
    return used


cdef class BinTable:
    """Memoised exact bin counts for descending item tuples of one capacity."""

    cdef public long long cap
    cdef dict _count
    cdef dict _drop

    def __init__(self, long long cap):
        self.cap = cap
        self._count = {}
        self._drop = {}

    cpdef long long count(self, tuple items) except -1:
        cdef object hit = self._count.get(items)
        cdef long long lower, upper, target, result
        cdef _Fit fit
        if hit is not None:
            return hit
        if not items:
            result = 0
        else:
            for s in items:
                if s > self.cap:
                    raise ValueError("an item exceeds the bin capacity")
            fit = _Fit(items, self.cap)
            lower = l2_bound(items, self.cap)
            upper = _ffd_count(fit.items, fit.n, self.cap)
            result = upper
            if lower < upper:
                for target in range(lower, upper):
                    if fit.fits(target):
                        result = target
                        break
        self._count[items] = result
        return result

    cpdef list drop(self, tuple items):
        cdef object hit = self._drop.get(items)
        cdef Py_ssize_t t
        if hit is None:
            hit = [self.count(items[t:]) for t in range(len(items) + 1)]
            self._drop[items] = hit
        return hit


# --- shared helpers --------------------------------------------------------


cdef long long _extra_modules(long long* caps, long long* loads, long long* counts, long long n_mod,
                              long long* items, long long n_items, long long maxcap, long long glob,
                              long long n_open):
    cdef long long free = 0, maxres = 0, r, rem = 0, sbig = 0, nhalf = 0, need, vol, b, i, d
    for i in range(n_mod):
        if counts[i]:
            r = caps[i] - loads[i]
            free += r
            if r > maxres:
                maxres = r
    for i in range(n_items):
        d = items[i]
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


cdef class _Common:
    """Inputs and buffers shared by both search modes."""

    cdef object ki
    cdef long long n_w, n_c, n_m, n_r
    cdef long long* cd
    cdef long long* md
    cdef double* rate
    cdef long long* morder
    cdef double* pen
    cdef long long* rack_class
    cdef double* suffix_cpu_load
    cdef long long cbins, mbins, cmaxcap, mmaxcap
    cdef double cidle_min, midle_min, mcoef_min, mem_fixed_total
    cdef bint rack_penalty, rack_symmetry
    cdef BinTable drop_table
    # DP scratch
    cdef double* g
    cdef double* h
    cdef long long dp_size
    cdef long long* demand
    cdef long long* free
    cdef long long* avail
    cdef long long* held
    cdef double* rpen
    cdef long long* ritems  # [r * n_w + i]
    cdef long long* rcount
    # search state
    cdef double best, eps
    cdef bint found, aborted
    cdef long long nodes, node_budget
    cdef double deadline

    def __init__(self, ki, double ub, double eps, long long node_budget, double time_budget):
        self.ki = ki
        self.n_w, self.n_c, self.n_m, self.n_r = ki.n_w, ki.n_c, ki.n_m, ki.n_racks
        self.cd = _icopy(ki.cd)
        self.md = _icopy(ki.md)
        self.rate = _dcopy(ki.rate)
        self.morder = _icopy(ki.morder)
        self.pen = _dcopy(ki.pen)
        self.rack_class = _icopy(ki.rack_class)
        self.suffix_cpu_load = _dcopy(ki.suffix_cpu_load)
        self.cbins, self.mbins, self.cmaxcap, self.mmaxcap = ki.cbins, ki.mbins, ki.cmaxcap, ki.mmaxcap
        self.cidle_min, self.midle_min, self.mcoef_min = ki.cidle_min, ki.midle_min, ki.mcoef_min
        self.mem_fixed_total = ki.mem_fixed_total
        self.rack_penalty = ki.rack_penalty
        self.rack_symmetry = ki.rack_symmetry
        self.drop_table = BinTable(ki.mmaxcap) if ki.rack_penalty else None
        self.dp_size = self.n_w + self.n_m + 2
        self.g = _dalloc(self.dp_size)
        self.h = _dalloc(self.dp_size)
        self.demand = _ialloc(self.n_r)
        self.free = _ialloc(self.n_r)
        self.avail = _ialloc(self.n_r)
        self.held = _ialloc(self.n_r)
        self.rpen = _dalloc(self.n_r)
        self.ritems = _ialloc(self.n_r * self.n_w)
        self.rcount = _ialloc(self.n_r)
        self.best = ub
        self.eps = eps
        self.found = False
        self.aborted = False
        self.nodes = 0
        self.node_budget = node_budget
        self.deadline = time.perf_counter() + time_budget

    def __dealloc__(self):
        PyMem_Free(self.cd)
        PyMem_Free(self.md)
        PyMem_Free(self.rate)
        PyMem_Free(self.morder)
        PyMem_Free(self.pen)
        PyMem_Free(self.rack_class)
        PyMem_Free(self.suffix_cpu_load)
        PyMem_Free(self.g)
        PyMem_Free(self.h)
        PyMem_Free(self.demand)
        PyMem_Free(self.free)
        PyMem_Free(self.avail)
        PyMem_Free(self.held)
        PyMem_Free(self.rpen)
        PyMem_Free(self.ritems)
        PyMem_Free(self.rcount)

    cdef bint enter(self) except -1:
        if self.aborted:
            return False
        self.nodes += 1
        if self.nodes > self.node_budget:
            self.aborted = True
            return False
        if (self.nodes & TIME_CHECK_MASK) == 0 and time.perf_counter() > self.deadline:
            self.aborted = True
            return False
        return True

    cdef void clear_racks(self):
        cdef long long r
        for r in range(self.n_r):
            self.demand[r] = 0
            self.free[r] = 0
            self.held[r] = 0
            self.rcount[r] = 0
            self.rpen[r] = INF

    cdef void add_item(self, long long r, long long p):
        self.demand[r] += self.md[p]
        self.ritems[r * self.n_w + self.rcount[r]] = self.md[p]
        self.rcount[r] += 1
        if self.pen[p] < self.rpen[r]:
            self.rpen[r] = self.pen[p]

    cdef double rack_memory_bound(self, long long need, bint use_table, bint use_held) except? -2.0:
        """Mirror of ``_bnb_py._rack_memory_bound`` over the scratch arrays."""
        cdef long long cap = self.mmaxcap, r, k, j, t, e, cnt, acc, i, slots, n_items
        cdef double idle = self.midle_min, pmin, f, v
        cdef double* g = self.g
        cdef double* h = self.h
        cdef double* tmp
        cdef list packed = None
        cdef long long* items
        for j in range(need + 1):
            g[j] = INF
        g[0] = 0.0
        for r in range(self.n_r):
            items = self.ritems + r * self.n_w
            n_items = self.rcount[r]
            pmin = self.rpen[r]
            for j in range(need + 1):
                h[j] = INF
            if use_table:
                packed = self.drop_table.drop(tuple([items[i] for i in range(n_items)]))
            for k in range(self.avail[r] + 1):
                e = self.demand[r] - self.free[r] - cap * k
                cnt = 0
                if e > 0:
                    acc = 0
                    for i in range(n_items):
                        acc += items[i]
                        cnt += 1
                        if acc >= e:
                            break
                if use_table:
                    slots = k + (self.held[r] if use_held else 0)
                    while <long long> packed[cnt] > slots:
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
            tmp = g
            g = h
            h = tmp
        return g[need]


# --- module-level search ---------------------------------------------------


cdef class _Modules(_Common):
    cdef long long* ccap
    cdef double* cidle
    cdef double* ccoef
    cdef long long* cgroup
    cdef long long* cgpos
    cdef long long* crack
    cdef long long* mcap
    cdef double* midle
    cdef double* mcoef
    cdef long long* mgroup
    cdef long long* mgpos
    cdef long long* mrack
    cdef long long* pair
    cdef double* energy
    cdef double* min_energy_c
    cdef double* suffix_fixed
    cdef long long* cload
    cdef long long* ccount
    cdef long long* mload
    cdef long long* mcount
    cdef long long* copen
    cdef long long* mopen
    cdef long long* rc_open
    cdef long long* rm_open
    cdef long long* cur_c
    cdef long long* cur_m
    cdef long long* best_c
    cdef long long* best_m
    cdef long long* tried  # [(level) * width + t]
    cdef long long* scratch
    cdef long long width
    cdef long long open_c, open_m

    def __init__(self, ki, double ub, double eps, long long node_budget, double time_budget):
        _Common.__init__(self, ki, ub, eps, node_budget, time_budget)
        self.ccap = _icopy(ki.ccap)
        self.cidle = _dcopy(ki.cidle)
        self.ccoef = _dcopy(ki.ccoef)
        self.cgroup = _icopy(ki.cgroup)
        self.cgpos = _icopy(ki.cgpos)
        self.crack = _icopy(ki.crack)
        self.mcap = _icopy(ki.mcap)
        self.midle = _dcopy(ki.midle)
        self.mcoef = _dcopy(ki.mcoef)
        self.mgroup = _icopy(ki.mgroup)
        self.mgpos = _icopy(ki.mgpos)
        self.mrack = _icopy(ki.mrack)
        self.pair = _icopy(ki.pair)
        self.energy = _dcopy(ki.energy)
        self.min_energy_c = _dcopy(ki.min_energy_c)
        self.suffix_fixed = _dcopy(ki.suffix_fixed)
        self.cload = _ialloc(self.n_c)
        self.ccount = _ialloc(self.n_c)
        self.mload = _ialloc(self.n_m)
        self.mcount = _ialloc(self.n_m)
        self.copen = _ialloc(ki.n_cgroups)
        self.mopen = _ialloc(ki.n_mgroups)
        self.rc_open = _ialloc(self.n_r)
        self.rm_open = _ialloc(self.n_r)
        self.cur_c = _ialloc(self.n_w)
        self.cur_m = _ialloc(self.n_w)
        self.best_c = _ialloc(self.n_w)
        self.best_m = _ialloc(self.n_w)
        self.width = max(self.n_c, self.n_m) + 1
        self.tried = _ialloc(2 * (self.n_w + 1) * self.width)
        self.scratch = _ialloc(self.n_w + 1)
        self.open_c = 0
        self.open_m = 0

    def __dealloc__(self):
        PyMem_Free(self.ccap)
        PyMem_Free(self.cidle)
        PyMem_Free(self.ccoef)
        PyMem_Free(self.cgroup)
        PyMem_Free(self.cgpos)
        PyMem_Free(self.crack)
        PyMem_Free(self.mcap)
        PyMem_Free(self.midle)
        PyMem_Free(self.mcoef)
        PyMem_Free(self.mgroup)
        PyMem_Free(self.mgpos)
        PyMem_Free(self.mrack)
        PyMem_Free(self.pair)
        PyMem_Free(self.energy)
        PyMem_Free(self.min_energy_c)
        PyMem_Free(self.suffix_fixed)
        PyMem_Free(self.cload)
        PyMem_Free(self.ccount)
        PyMem_Free(self.mload)
        PyMem_Free(self.mcount)
        PyMem_Free(self.copen)
        PyMem_Free(self.mopen)
        PyMem_Free(self.rc_open)
        PyMem_Free(self.rm_open)
        PyMem_Free(self.cur_c)
        PyMem_Free(self.cur_m)
        PyMem_Free(self.best_c)
        PyMem_Free(self.best_m)
        PyMem_Free(self.tried)
        PyMem_Free(self.scratch)

    cdef void leaf(self, double cost):
        cdef long long i
        if cost < self.best - self.eps:
            self.best = cost
            for i in range(self.n_w):
                self.best_c[i] = self.cur_c[i]
                self.best_m[i] = self.cur_m[i]
            self.found = True

    cdef bint cpu_rack_ok(self, long long r):
        cdef long long r2
        if self.rc_open[r] or not self.rack_symmetry:
            return True
        for r2 in range(r):
            if self.rack_class[r2] == self.rack_class[r] and self.rc_open[r2] == 0:
                return False
        return True

    cdef bint mem_rack_ok(self, long long r):
        cdef long long r2
        if self.rm_open[r] or self.rc_open[r] or not self.rack_symmetry:
            return True
        for r2 in range(r):
            if self.rack_class[r2] == self.rack_class[r] and self.rc_open[r2] == 0 and self.rm_open[r2] == 0:
                return False
        return True

    cdef bint open_cpu(self, long long c, long long d):
        cdef bint new_c = self.ccount[c] == 0
        self.cload[c] += d
        self.ccount[c] += 1
        if new_c:
            self.copen[self.cgroup[c]] += 1
            self.rc_open[self.crack[c]] += 1
            self.open_c += 1
        return new_c

    cdef void close_cpu(self, long long c, long long d, bint new_c):
        self.cload[c] -= d
        self.ccount[c] -= 1
        if new_c:
            self.copen[self.cgroup[c]] -= 1
            self.rc_open[self.crack[c]] -= 1
            self.open_c -= 1

    cdef bint open_mem(self, long long m, long long d):
        cdef bint new_m = self.mcount[m] == 0
        self.mload[m] += d
        self.mcount[m] += 1
        if new_m:
            self.mopen[self.mgroup[m]] += 1
            self.rm_open[self.mrack[m]] += 1
            self.open_m += 1
        return new_m

    cdef void close_mem(self, long long m, long long d, bint new_m):
        self.mload[m] -= d
        self.mcount[m] -= 1
        if new_m:
            self.mopen[self.mgroup[m]] -= 1
            self.rm_open[self.mrack[m]] -= 1
            self.open_m -= 1

    cdef int rec_paired(self, long long k, double cost) except -1:
        cdef long long dc, dm, dw, mw, c, m, nt, t, ct
        cdef double bound, dcost
        cdef bint new_c, new_m, dup
        cdef long long* tried
        if not self.enter():
            return 0
        if k == self.n_w:
            self.leaf(cost)
            return 0
        dc = _extra_modules(self.ccap, self.cload, self.ccount, self.n_c, self.cd + k, self.n_w - k,
                            self.cmaxcap, self.cbins, self.open_c)
        dm = _extra_modules(self.mcap, self.mload, self.mcount, self.n_m, self.md + k, self.n_w - k,
                            self.mmaxcap, self.mbins, self.open_m)
        if dm > dc:
            dc = dm
        bound = cost + self.suffix_fixed[k] + (self.cidle_min + self.midle_min) * dc
        if bound >= self.best - self.eps:
            return 0
        dw = self.cd[k]
        mw = self.md[k]
        tried = self.tried + k * self.width
        nt = 0
        for c in range(self.n_c):
            if self.ccount[c] == 0 and (self.cgpos[c] != self.copen[self.cgroup[c]] or not self.cpu_rack_ok(self.crack[c])):
                continue
            m = self.pair[c]
            if self.cload[c] + dw > self.ccap[c] or self.mload[m] + mw > self.mcap[m]:
                continue
            if self.ccount[c]:
                dup = False
                for t in range(nt):
                    ct = tried[t]
                    if self.cgroup[ct] == self.cgroup[c] and self.cload[ct] == self.cload[c] and self.mload[self.pair[ct]] == self.mload[m]:
                        dup = True
                        break
                if dup:
                    continue
                tried[nt] = c
                nt += 1
            dcost = 0.0
            if self.ccount[c] == 0:
                dcost += self.cidle[c]
            dcost += self.ccoef[c] * dw
            if self.mcount[m] == 0:
                dcost += self.midle[m]
            dcost += self.mcoef[m] * mw
            dcost += self.rate[k] * self.energy[c * self.n_m + m]
            new_c = self.open_cpu(c, dw)
            new_m = self.open_mem(m, mw)
            self.cur_c[k] = c
            self.cur_m[k] = m
            self.rec_paired(k + 1, cost + dcost)
            self.close_mem(m, mw, new_m)
            self.close_cpu(c, dw, new_c)
            if self.aborted:
                return 0
        return 0

    cdef double memory_bound_cpu_phase(self, long long k) except? -2.0:
        cdef long long q, p
        if not self.rack_penalty:
            return self.midle_min * self.mbins
        self.clear_racks()
        for q in range(self.n_w):
            p = self.morder[q]
            if p < k:
                self.add_item(self.crack[self.cur_c[p]], p)
        for q in range(self.n_r):
            self.avail[q] = self.ki.rack_mcount[q]
        return self.rack_memory_bound(self.mbins, True, False)

    cdef int rec_cpu(self, long long k, double cost) except -1:
        cdef long long dc, dw, c, nt, t, ct
        cdef double bound, dcost
        cdef bint new_c, dup
        cdef long long* tried
        if not self.enter():
            return 0
        if k == self.n_w:
            self.rec_mem(0, cost)
            return 0
        dc = _extra_modules(self.ccap, self.cload, self.ccount, self.n_c, self.cd + k, self.n_w - k,
                            self.cmaxcap, self.cbins, self.open_c)
        bound = cost + self.suffix_cpu_load[k] + self.cidle_min * dc + self.mem_fixed_total + self.memory_bound_cpu_phase(k)
        if bound >= self.best - self.eps:
            return 0
        dw = self.cd[k]
        tried = self.tried + k * self.width
        nt = 0
        for c in range(self.n_c):
            if self.ccount[c] == 0 and (self.cgpos[c] != self.copen[self.cgroup[c]] or not self.cpu_rack_ok(self.crack[c])):
                continue
            if self.cload[c] + dw > self.ccap[c] or self.min_energy_c[c] == INF:
                continue
            if self.ccount[c]:
                dup = False
                for t in range(nt):
                    ct = tried[t]
                    if self.cgroup[ct] == self.cgroup[c] and self.cload[ct] == self.cload[c]:
                        dup = True
                        break
                if dup:
                    continue
                tried[nt] = c
                nt += 1
            dcost = 0.0
            if self.ccount[c] == 0:
                dcost += self.cidle[c]
            dcost += self.ccoef[c] * dw
            new_c = self.open_cpu(c, dw)
            self.cur_c[k] = c
            self.rec_cpu(k + 1, cost + dcost)
            self.close_cpu(c, dw, new_c)
            if self.aborted:
                return 0
        return 0

    cdef int rec_mem(self, long long j, double cost) except -1:
        cdef long long q, p, need, n_items, m, c, mw, nt, t, mt
        cdef double rest, idle, e, dcost
        cdef bint new_m, dup
        cdef long long* tried
        if j > 0 and not self.enter():
            return 0
        if j == self.n_w:
            self.leaf(cost)
            return 0
        rest = 0.0
        n_items = 0
        for q in range(j, self.n_w):
            p = self.morder[q]
            rest += self.mcoef_min * self.md[p] + self.rate[p] * self.min_energy_c[self.cur_c[p]]
            self.scratch[n_items] = self.md[p]
            n_items += 1
        need = _extra_modules(self.mcap, self.mload, self.mcount, self.n_m, self.scratch, n_items,
                              self.mmaxcap, self.mbins, self.open_m)
        if self.rack_penalty:
            self.clear_racks()
            for q in range(self.n_r):
                self.avail[q] = self.ki.rack_mcount[q]
            for m in range(self.n_m):
                if self.mcount[m]:
                    self.free[self.mrack[m]] += self.mcap[m] - self.mload[m]
                    self.avail[self.mrack[m]] -= 1
                    self.held[self.mrack[m]] += 1
            for q in range(j, self.n_w):
                p = self.morder[q]
                self.add_item(self.crack[self.cur_c[p]], p)
            idle = self.rack_memory_bound(need, True, True)
        else:
            idle = self.midle_min * need
        if cost + rest + idle >= self.best - self.eps:
            return 0
        p = self.morder[j]
        c = self.cur_c[p]
        mw = self.md[p]
        tried = self.tried + (self.n_w + 1 + j) * self.width
        nt = 0
        for m in range(self.n_m):
            e = self.energy[c * self.n_m + m]
            if e == FORBIDDEN:
                continue
            if self.mcount[m] == 0 and (self.mgpos[m] != self.mopen[self.mgroup[m]] or not self.mem_rack_ok(self.mrack[m])):
                continue
            if self.mload[m] + mw > self.mcap[m]:
                continue
            if self.mcount[m]:
                dup = False
                for t in range(nt):
                    mt = tried[t]
                    if self.mgroup[mt] == self.mgroup[m] and self.mload[mt] == self.mload[m]:
                        dup = True
                        break
                if dup:
                    continue
                tried[nt] = m
                nt += 1
            dcost = 0.0
            if self.mcount[m] == 0:
                dcost += self.midle[m]
            dcost += self.mcoef[m] * mw
            dcost += self.rate[p] * e
            new_m = self.open_mem(m, mw)
            self.cur_m[p] = m
            self.rec_mem(j + 1, cost + dcost)
            self.close_mem(m, mw, new_m)
            if self.aborted:
                return 0
        return 0

    def run(self):
        if self.ki.paired:
            self.rec_paired(0, 0.0)
        else:
            self.rec_cpu(0, 0.0)
        best_c = [self.best_c[i] for i in range(self.n_w)]
        best_m = [self.best_m[i] for i in range(self.n_w)]
        return self.found, best_c, best_m, self.best, self.nodes, not self.aborted


# --- rack-level search -----------------------------------------------------


cdef class _Pooled(_Common):
    cdef long long* ncpu  # modules per rack
    cdef long long* nmem
    cdef long long* rccap
    cdef double* rcidle
    cdef double* rccoef
    cdef long long* rmcap
    cdef double* rmidle
    cdef double* rmcoef
    cdef double* renergy
    cdef double* rmin_energy
    cdef long long* suffix_cd
    cdef long long* cb
    cdef long long* mb
    cdef long long* cv
    cdef long long* mv
    cdef long long* crack_of
    cdef long long* mrack_of
    cdef long long* best_c
    cdef long long* best_m
    cdef list citems
    cdef list mitems
    cdef list ctab
    cdef list mtab
    cdef list mem_rack_order

    def __init__(self, ki, double ub, double eps, long long node_budget, double time_budget):
        cdef long long k, r
        _Common.__init__(self, ki, ub, eps, node_budget, time_budget)
        self.ncpu = _icopy([len(x) for x in ki.rack_cpus])
        self.nmem = _icopy([len(x) for x in ki.rack_mems])
        self.rccap = _icopy(ki.rccap)
        self.rcidle = _dcopy(ki.rcidle)
        self.rccoef = _dcopy(ki.rccoef)
        self.rmcap = _icopy(ki.rmcap)
        self.rmidle = _dcopy(ki.rmidle)
        self.rmcoef = _dcopy(ki.rmcoef)
        self.renergy = _dcopy(ki.renergy)
        self.rmin_energy = _dcopy(ki.rmin_energy)
        self.suffix_cd = _ialloc(self.n_w + 1)
        for k in range(self.n_w - 1, -1, -1):
            self.suffix_cd[k] = self.suffix_cd[k + 1] + self.cd[k]
        self.cb = _ialloc(self.n_r)
        self.mb = _ialloc(self.n_r)
        self.cv = _ialloc(self.n_r)
        self.mv = _ialloc(self.n_r)
        self.crack_of = _ialloc(self.n_w)
        self.mrack_of = _ialloc(self.n_w)
        self.best_c = _ialloc(self.n_w)
        self.best_m = _ialloc(self.n_w)
        self.citems = [()] * self.n_r
        self.mitems = [()] * self.n_r
        tables = {}
        for cap in list(ki.rccap) + list(ki.rmcap):
            if cap and cap not in tables:
                tables[cap] = BinTable(cap)
        if ki.rack_penalty:
            self.drop_table = tables[ki.mmaxcap]
        self.ctab = [tables.get(ki.rccap[r]) for r in range(self.n_r)]
        self.mtab = [tables.get(ki.rmcap[r]) for r in range(self.n_r)]
        self.mem_rack_order = [list(x) for x in ki.mem_rack_order]

    def __dealloc__(self):
        PyMem_Free(self.ncpu)
        PyMem_Free(self.nmem)
        PyMem_Free(self.rccap)
        PyMem_Free(self.rcidle)
        PyMem_Free(self.rccoef)
        PyMem_Free(self.rmcap)
        PyMem_Free(self.rmidle)
        PyMem_Free(self.rmcoef)
        PyMem_Free(self.renergy)
        PyMem_Free(self.rmin_energy)
        PyMem_Free(self.suffix_cd)
        PyMem_Free(self.cb)
        PyMem_Free(self.mb)
        PyMem_Free(self.cv)
        PyMem_Free(self.mv)
        PyMem_Free(self.crack_of)
        PyMem_Free(self.mrack_of)
        PyMem_Free(self.best_c)
        PyMem_Free(self.best_m)

    cdef bint untouched_twin_below(self, long long r, bint mem_phase):
        cdef long long r2
        if not self.rack_symmetry:
            return False
        for r2 in range(r):
            if self.rack_class[r2] == self.rack_class[r] and not self.citems[r2] and not (mem_phase and self.mitems[r2]):
                return True
        return False

    cdef long long extra_bins(self, long long vol_left, long long* caps, long long* counts, long long* vols,
                              long long maxcap, long long glob):
        cdef long long slack = 0, used = 0, r, need, over, b
        for r in range(self.n_r):
            slack += caps[r] * counts[r] - vols[r]
            used += counts[r]
        need = glob - used
        over = vol_left - slack
        if over > 0:
            b = (over + maxcap - 1) // maxcap
            if b > need:
                need = b
        return need if need > 0 else 0

    cdef int rec_cpu(self, long long k, double cost) except -1:
        cdef long long extra, q, p, r, d, b, old_b
        cdef double mem_lb, bound, dcost
        cdef tuple grown, old_items
        if not self.enter():
            return 0
        if k == self.n_w:
            self.rec_mem(0, cost)
            return 0
        extra = self.extra_bins(self.suffix_cd[k], self.rccap, self.cb, self.cv, self.cmaxcap, self.cbins)
        if self.rack_penalty:
            self.clear_racks()
            for q in range(self.n_w):
                p = self.morder[q]
                if p < k:
                    self.add_item(self.crack_of[p], p)
            for r in range(self.n_r):
                self.avail[r] = self.nmem[r]
            mem_lb = self.rack_memory_bound(self.mbins, True, False)
        else:
            mem_lb = self.midle_min * self.mbins
        bound = cost + self.suffix_cpu_load[k] + self.cidle_min * extra + self.mem_fixed_total + mem_lb
        if bound >= self.best - self.eps:
            return 0
        d = self.cd[k]
        for r in range(self.n_r):
            if not self.ncpu[r] or self.rccap[r] < d or self.rmin_energy[r] == INF:
                continue
            if not self.citems[r] and self.untouched_twin_below(r, False):
                continue
            old_items = self.citems[r]
            grown = old_items + (d,)
            b = (<BinTable> self.ctab[r]).count(grown)
            if b > self.ncpu[r]:
                continue
            dcost = self.rcidle[r] * (b - self.cb[r]) + self.rccoef[r] * d
            old_b = self.cb[r]
            self.citems[r] = grown
            self.cb[r] = b
            self.cv[r] += d
            self.crack_of[k] = r
            self.rec_cpu(k + 1, cost + dcost)
            self.citems[r] = old_items
            self.cb[r] = old_b
            self.cv[r] -= d
            if self.aborted:
                return 0
        return 0

    cdef int rec_mem(self, long long j, double cost) except -1:
        cdef long long q, p, vol_left, extra, r, a, d, b, nb, old_b, i
        cdef double rest, idle, dcost
        cdef tuple grown, old_items
        if j > 0 and not self.enter():
            return 0
        if j == self.n_w:
            if cost < self.best - self.eps:
                self.best = cost
                for i in range(self.n_w):
                    self.best_c[i] = self.crack_of[i]
                    self.best_m[i] = self.mrack_of[i]
                self.found = True
            return 0
        rest = 0.0
        vol_left = 0
        for q in range(j, self.n_w):
            p = self.morder[q]
            rest += self.mcoef_min * self.md[p] + self.rate[p] * self.rmin_energy[self.crack_of[p]]
            vol_left += self.md[p]
        extra = self.extra_bins(vol_left, self.rmcap, self.mb, self.mv, self.mmaxcap, self.mbins)
        if self.rack_penalty:
            self.clear_racks()
            for r in range(self.n_r):
                self.free[r] = self.rmcap[r] * self.mb[r] - self.mv[r]
                self.avail[r] = self.nmem[r] - self.mb[r]
                self.held[r] = self.mb[r]
            for q in range(j, self.n_w):
                p = self.morder[q]
                self.add_item(self.crack_of[p], p)
            idle = self.rack_memory_bound(extra, True, True)
        else:
            idle = self.midle_min * extra
        if cost + rest + idle >= self.best - self.eps:
            return 0
        p = self.morder[j]
        a = self.crack_of[p]
        d = self.md[p]
        for b in self.mem_rack_order[a]:
            if self.rmcap[b] < d:
                continue
            if not self.mitems[b] and not self.citems[b] and self.untouched_twin_below(b, True):
                continue
            old_items = self.mitems[b]
            grown = old_items + (d,)
            nb = (<BinTable> self.mtab[b]).count(grown)
            if nb > self.nmem[b]:
                continue
            dcost = self.rmidle[b] * (nb - self.mb[b]) + self.rmcoef[b] * d + self.rate[p] * self.renergy[a * self.n_r + b]
            old_b = self.mb[b]
            self.mitems[b] = grown
            self.mb[b] = nb
            self.mv[b] += d
            self.mrack_of[p] = b
            self.rec_mem(j + 1, cost + dcost)
            self.mitems[b] = old_items
            self.mb[b] = old_b
            self.mv[b] -= d
            if self.aborted:
                return 0
        return 0

    def run(self):
        cdef long long i
        ki = self.ki
        self.rec_cpu(0, 0.0)
        if not self.found:
            return False, [0] * self.n_w, [0] * self.n_w, self.best, self.nodes, not self.aborted
        best_c = [self.best_c[i] for i in range(self.n_w)]
        best_m = [self.best_m[i] for i in range(self.n_w)]
        cpu_idx = _unpack(ki, best_c, list(range(self.n_w)), ki.cd, ki.rack_cpus, ki.rccap)
        mem_idx = _unpack(ki, best_m, list(ki.morder), ki.md, ki.rack_mems, ki.rmcap)
        return True, cpu_idx, mem_idx, self.best, self.nodes, not self.aborted


def _unpack(ki, rack_of, positions, sizes, rack_mods, caps):
    out = [0] * len(rack_of)
    for r in range(ki.n_racks):
        mine = [p for p in positions if rack_of[p] == r]
        if mine:
            where = pack_min([sizes[p] for p in mine], caps[r])
            for p, b in zip(mine, where):
                out[p] = rack_mods[r][b]
    return out


def search(ki, double ub, double eps, long long node_budget, double time_budget):
    """Return ``(found, cpu_idx, mem_idx, cost, nodes, complete)`` indexed by search position."""
    if ki.pooled:
        return _Pooled(ki, ub, eps, node_budget, time_budget).run()
    return _Modules(ki, ub, eps, node_budget, time_budget).run()
