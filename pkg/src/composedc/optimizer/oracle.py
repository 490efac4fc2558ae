"""Exhaustive enumeration oracle for small instances.

Shares nothing with the branch-and-bound search: every capacity-feasible
CPU assignment vector is paired with every capacity-feasible memory
assignment vector and the objective is summed directly.
"""

from __future__ import annotations

import itertools
import time
from typing import Iterator

import numpy as np

from ..domain import Placement
from ..fabric import io_energy
from .model import InfeasibleInstanceError, MilpInstance, SolveResult, finish

MAX_WORKLOADS = 8
MAX_MODULES_PER_KIND = 10
MAX_PAIRINGS = 200_000_000


class OracleRefusedError(ValueError):
    """The instance is too large to enumerate."""


def _vectors(demands: list[int], caps: list[int]) -> np.ndarray:
    """All assignment vectors (rows) that respect capacities, in lexicographic order."""
    rows = []
    for vec in itertools.product(range(len(caps)), repeat=len(demands)):
        load = [0] * len(caps)
        for d, i in zip(demands, vec):
            load[i] += d
        if all(l <= c for l, c in zip(load, caps)):
            rows.append(vec)
    return np.array(rows, dtype=np.int64).reshape(len(rows), len(demands))


def _side_cost(vecs: np.ndarray, demands: list[int], specs: list) -> np.ndarray:
    n = len(specs)
    loads = np.zeros((vecs.shape[0], n), dtype=np.int64)
    for j, d in enumerate(demands):
        np.add.at(loads, (np.arange(vecs.shape[0]), vecs[:, j]), d)
    idle = np.array([s.idle_power for s in specs])
    dyn = np.array([s.dynamic_power for s in specs])
    cap = np.array([s.capacity for s in specs], dtype=float)
    active = loads > 0
    return (active * idle).sum(axis=1) + (loads / cap * dyn).sum(axis=1)


def _check_guard(instance: MilpInstance) -> None:
    t = instance.topology
    n_w = len(instance.workloads)
    if n_w > MAX_WORKLOADS or len(t.cpus) > MAX_MODULES_PER_KIND or len(t.mems) > MAX_MODULES_PER_KIND:
        raise OracleRefusedError(
            f"oracle handles at most {MAX_WORKLOADS} workloads and {MAX_MODULES_PER_KIND} modules per kind"
        )
    mem_side = 1 if not t.kind.disaggregated else len(t.mems) ** n_w
    if len(t.cpus) ** n_w * mem_side > MAX_PAIRINGS:
        raise OracleRefusedError(f"{len(t.cpus) ** n_w * mem_side} pairings exceed the enumeration limit")


def _totals(instance: MilpInstance) -> Iterator[tuple[np.ndarray, np.ndarray, np.ndarray]]:
    """Yield ``(cpu_vector, mem_vectors, totals)`` blocks covering every feasible placement."""
    t = instance.topology
    ws = list(instance.workloads)
    cpus, mems = list(t.cpus), list(t.mems)
    cd = [w.cpu_demand for w in ws]
    md = [w.mem_demand for w in ws]
    rates = np.array([w.cpu_mem_rate for w in ws])
    io_rate = 0.0
    for w in ws:
        io_rate += sum(v for k, v in w.flows.items() if not k.is_cpu_mem)
    io_cost = io_rate * io_energy(t, instance.policy)

    energy = np.full((len(cpus), len(mems)), np.inf)
    for i, c in enumerate(cpus):
        for j, m in enumerate(mems):
            if instance.pair_allowed(c.id, m.id):
                energy[i, j] = instance.pair_energy(c.id, m.id)

    cvecs = _vectors(cd, [c.spec.capacity for c in cpus])
    ccost = _side_cost(cvecs, cd, [c.spec for c in cpus])
    if not t.kind.disaggregated:
        partner = [next(j for j, m in enumerate(mems) if m.board == c.board) for c in cpus]
        mvecs_all = np.array(partner, dtype=np.int64)[cvecs] if len(cvecs) else cvecs
        mcap = np.array([m.spec.capacity for m in mems])
        for i in range(len(cvecs)):
            mv = mvecs_all[i : i + 1]
            loads = np.bincount(mv[0], weights=md, minlength=len(mems)) if len(md) else np.zeros(len(mems))
            if np.any(loads > mcap):
                continue
            mc = _side_cost(mv, md, [m.spec for m in mems])
            net = (rates * energy[cvecs[i], mv[0]]).sum() if len(ws) else 0.0
            yield cvecs[i], mv, np.array([ccost[i] + mc[0] + net + io_cost])
        return

    mvecs = _vectors(md, [m.spec.capacity for m in mems])
    if not len(mvecs):
        return
    mcost = _side_cost(mvecs, md, [m.spec for m in mems])
    for i in range(len(cvecs)):
        net = np.zeros(len(mvecs))
        for j in range(len(ws)):
            net += rates[j] * energy[cvecs[i, j], mvecs[:, j]]
        yield cvecs[i], mvecs, ccost[i] + mcost + net + io_cost


def _placement(instance: MilpInstance, cvec, mvec) -> Placement:
    t = instance.topology
    cpus, mems = t.cpus, t.mems
    return Placement({w.id: (cpus[int(c)].id, mems[int(m)].id) for w, c, m in zip(instance.workloads, cvec, mvec)})


def brute_force_oracle(instance: MilpInstance) -> SolveResult:
    """Global optimum by full enumeration; ties go to the first placement in workload-id order."""
    start = time.perf_counter()
    _check_guard(instance)
    best, best_vecs, count = np.inf, None, 0
    for cvec, mvecs, totals in _totals(instance):
        count += int(np.isfinite(totals).sum())
        j = int(np.argmin(totals))
        if totals[j] < best:
            best, best_vecs = float(totals[j]), (cvec, mvecs[j])
    if best_vecs is None:
        raise InfeasibleInstanceError("no placement satisfies the capacity and locality constraints")
    return finish(instance, _placement(instance, *best_vecs), True, count, time.perf_counter() - start, "oracle")


def enumerate_optimal(instance: MilpInstance, rel_tol: float = 1e-9) -> tuple[float, set[Placement]]:
    """Optimal objective and the full set of placements attaining it (within ``rel_tol``)."""
    _check_guard(instance)
    blocks = list(_totals(instance))
    if not blocks:
        raise InfeasibleInstanceError("no feasible placement")
    best = min(float(np.min(tot)) for _, _, tot in blocks)
    cut = best + rel_tol * max(1.0, abs(best))
    optimal = set()
    for cvec, mvecs, totals in blocks:
        for j in np.flatnonzero(totals <= cut):
            optimal.add(_placement(instance, cvec, mvecs[j]))
    return best, optimal
