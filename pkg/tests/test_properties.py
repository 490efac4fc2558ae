"""Property-based checks of the power model, fabric accounting and solvers."""

import random

from hypothesis import given, settings
from hypothesis import strategies as st

from composedc.domain import CPU_SPEC, MEM_SPEC, ArchitectureKind, EpbTable, Placement, Tier, build_topology
from composedc.fabric import TierPolicy, network_power_by_tier, traffic_by_tier
from composedc.optimizer import InfeasibleInstanceError, brute_force_oracle, solve_exact, solve_greedy
from composedc.power import power_report, resource_power
from composedc.wlgen import generate_workloads

from conftest import random_small_instance, wl

units = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)


@given(units, units)
def test_resource_power_monotone(u, v):
    lo, hi = sorted((u, v))
    assert resource_power(CPU_SPEC, lo) <= resource_power(CPU_SPEC, hi)


def random_placement(rnd, topo, ws):
    """Capacity-respecting random placement, or None if the draw overflows."""
    cpus, mems = topo.cpus, topo.mems
    out = {}
    for w in ws:
        c = rnd.choice(cpus)
        m = topo.partner(c.id) if not topo.kind.disaggregated else rnd.choice(mems)
        out[w.id] = (c.id, m.id)
    p = Placement(out)
    try:
        power_report(topo, ws, p)
    except ValueError:
        return None
    return p


layouts = st.sampled_from(
    [(ArchitectureKind.TRADITIONAL, 6, 1), (ArchitectureKind.RACK_SCALE, 6, 2), (ArchitectureKind.POD_SCALE, 6, 2)]
)


@settings(max_examples=60, deadline=None)
@given(layouts, st.integers(0, 2**32), st.integers(0, 5))
def test_report_invariants(layout, seed, n):
    kind, m, racks = layout
    topo = build_topology(kind, m, m, racks)
    ws = generate_workloads(seed, n)
    p = random_placement(random.Random(seed), topo, ws)
    if p is None:
        return
    r = power_report(topo, ws, p)
    assert r.total == r.tcpc + r.tmpc + r.tnpc
    # load terms depend only on total demand
    idle_c = r.active_cpus * CPU_SPEC.idle_power
    idle_m = r.active_mems * MEM_SPEC.idle_power
    total_c = sum(w.cpu_demand for w in ws)
    total_m = sum(w.mem_demand for w in ws)
    assert abs((r.tcpc - idle_c) - CPU_SPEC.dynamic_power * total_c / CPU_SPEC.capacity) <= 1e-9
    assert abs((r.tmpc - idle_m) - MEM_SPEC.dynamic_power * total_m / MEM_SPEC.capacity) <= 1e-9
    # IO attribution does not depend on where anything sits
    io = sum(v for w in ws for k, v in w.flows.items() if not k.is_cpu_mem)
    assert r.interdc_power == io * 500.0 * 1e-3


@settings(max_examples=60, deadline=None)
@given(layouts, st.integers(0, 2**32), st.integers(0, 4), st.integers(0, 4))
def test_traffic_is_linear(layout, seed, n1, n2):
    kind, m, racks = layout
    topo = build_topology(kind, m, m, racks)
    ws = [wl(i, w.cpu_demand, w.mem_demand) for i, w in enumerate(generate_workloads(seed, n1 + n2))]
    p = random_placement(random.Random(seed), topo, ws)
    if p is None:
        return
    a, b = ws[:n1], ws[n1:]
    pa = Placement({w.id: p[w.id] for w in a})
    pb = Placement({w.id: p[w.id] for w in b})
    for pol in TierPolicy:
        whole = traffic_by_tier(topo, ws, p, pol)
        ta, tb = traffic_by_tier(topo, a, pa, pol), traffic_by_tier(topo, b, pb, pol)
        for t in Tier:
            assert abs(whole[t] - (ta[t] + tb[t])) <= 1e-9


@given(st.dictionaries(st.sampled_from(list(Tier)), st.floats(0, 1e4, allow_subnormal=False)), st.sampled_from([0.5, 2.0, 4.0, 0.25]))
def test_epb_scaling_is_exact(traffic, k):
    base = EpbTable()
    p1, _ = network_power_by_tier(traffic, base)
    p2, _ = network_power_by_tier(traffic, base.scaled(k))
    for t in Tier:
        assert p2[t] == k * p1[t]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32))
def test_exact_matches_oracle_and_beats_greedy(seed):
    inst = random_small_instance(random.Random(seed), max_workloads=5, max_modules=3)
    try:
        want = brute_force_oracle(inst).objective
    except InfeasibleInstanceError:
        return
    got = solve_exact(inst)
    assert got.proven_optimal
    assert abs(got.objective - want) <= 1e-9 * max(1.0, want)
    try:
        g = solve_greedy(inst)
    except Exception:
        return
    assert g.objective >= got.objective - 1e-9
