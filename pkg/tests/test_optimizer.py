import math
import random

import pytest

from composedc.domain import ArchitectureKind, Placement, build_topology
from composedc.fabric import TierPolicy
from composedc.optimizer import (
    BudgetExhaustedError,
    InfeasibleInstanceError,
    MilpInstance,
    brute_force_oracle,
    check_feasible,
    enumerate_optimal,
    objective_value,
    solve_exact,
    solve_greedy,
)
from composedc.optimizer.oracle import OracleRefusedError
from composedc.power import InfeasiblePlacementError
from composedc.wlgen import generate_workloads

from conftest import kernel_solve, random_small_instance, wl

TWO = (wl(0, 20, 60), wl(1, 20, 60))


def test_traditional_two_workload_objective():
    inst = MilpInstance(build_topology(ArchitectureKind.TRADITIONAL, 2, 2, 1), TWO)
    p = Placement({0: ("cpu0", "mem0"), 1: ("cpu1", "mem1")})
    want = (225.0 + 1 / 3) + 62.0 + 6.44
    assert objective_value(inst, p) == pytest.approx(want, abs=1e-9)
    assert solve_exact(inst).objective == pytest.approx(want, abs=1e-9)


def test_rackscale_shares_one_memory(kernel):
    inst = MilpInstance(build_topology(ArchitectureKind.RACK_SCALE, 2, 2, 1), TWO)
    res = solve_exact(inst, kernel=kernel)
    assert res.proven_optimal
    assert res.objective == pytest.approx(276.0 + 1 / 3, abs=1e-9)
    cpus = {res.placement[0][0], res.placement[1][0]}
    mems = {res.placement[0][1], res.placement[1][1]}
    assert len(cpus) == 2 and len(mems) == 1
    assert solve_greedy(inst).placement == res.placement


def test_podscale_oracle_shares_memory():
    inst = MilpInstance(build_topology(ArchitectureKind.POD_SCALE, 2, 2, 2), TWO)
    res = brute_force_oracle(inst)
    assert res.placement[0][1] == res.placement[1][1]
    assert res.objective == pytest.approx(solve_exact(inst).objective, abs=1e-9)


def test_check_feasible_examples():
    trad = MilpInstance(build_topology(ArchitectureKind.TRADITIONAL, 2, 2, 1), TWO[:1])
    assert any("co-location" in v for v in check_feasible(trad, Placement({0: ("cpu0", "mem1")})))
    empty = MilpInstance(build_topology(ArchitectureKind.RACK_SCALE, 2, 2, 1), ())
    assert check_feasible(empty, Placement({})) == []
    over = MilpInstance(build_topology(ArchitectureKind.RACK_SCALE, 2, 2, 1), (wl(0, 20, 50), wl(1, 17, 50)))
    got = check_feasible(over, Placement({0: ("cpu0", "mem0"), 1: ("cpu0", "mem0")}))
    assert got == ["capacity: module cpu0 overloaded by 0.1"]
    with pytest.raises(InfeasiblePlacementError):
        objective_value(over, Placement({0: ("cpu0", "mem0"), 1: ("cpu0", "mem0")}))


def test_zero_workloads():
    for kind in ArchitectureKind:
        inst = MilpInstance(build_topology(kind, 2, 2, 2 if kind is ArchitectureKind.POD_SCALE else 1), ())
        assert solve_exact(inst).objective == 0.0
        assert brute_force_oracle(inst).objective == 0.0


def test_single_workload_matches_hand_value():
    inst = MilpInstance(build_topology(ArchitectureKind.POD_SCALE, 3, 3, 2), (wl(0, 18, 120),))
    want = (91 + 39 * 0.5) + (28 + 12 * 0.5) + 220 * 35e-3 + 6 * 0.5
    assert solve_exact(inst).objective == pytest.approx(want, abs=1e-9)
    assert solve_greedy(inst).objective == pytest.approx(want, abs=1e-9)


def test_tight_cpu_packing():
    # 1.9+1.9, 1.8+1.8 cannot share beyond 3.6 GHz: three CPUs either way
    ws = (wl(0, 19, 50), wl(1, 19, 50), wl(2, 18, 50), wl(3, 18, 50))
    inst = MilpInstance(build_topology(ArchitectureKind.RACK_SCALE, 4, 4, 1), ws)
    for res in (solve_exact(inst), solve_greedy(inst), brute_force_oracle(inst)):
        assert len({res.placement[w.id][0] for w in ws}) == 3


def test_infeasible_instance():
    ws = tuple(wl(i, 30, 50) for i in range(3))
    inst = MilpInstance(build_topology(ArchitectureKind.RACK_SCALE, 2, 2, 1), ws)
    with pytest.raises(InfeasibleInstanceError):
        solve_exact(inst)
    with pytest.raises(InfeasibleInstanceError):
        brute_force_oracle(inst)
    with pytest.raises(InfeasibleInstanceError):
        MilpInstance(build_topology(ArchitectureKind.RACK_SCALE, 2, 2, 1), (wl(0, 40, 50),))


def test_budget_exhaustion_keeps_greedy_seed():
    inst = MilpInstance(build_topology(ArchitectureKind.RACK_SCALE, 20, 20, 2), tuple(generate_workloads(2, 20)))
    res = solve_exact(inst, node_budget=2)
    assert not res.proven_optimal
    assert res.objective <= solve_greedy(inst).objective


def test_budget_exhaustion_without_incumbent(monkeypatch):
    import composedc.optimizer.exact as exact
    from composedc.optimizer import HeuristicInfeasibleError

    def no_seed(_):
        raise HeuristicInfeasibleError("no seed")

    monkeypatch.setattr(exact, "solve_greedy", no_seed)
    inst = MilpInstance(build_topology(ArchitectureKind.RACK_SCALE, 20, 20, 2), tuple(generate_workloads(2, 20)))
    with pytest.raises(BudgetExhaustedError):
        solve_exact(inst, node_budget=1)


def test_rack_locality_toggle():
    topo = build_topology(ArchitectureKind.RACK_SCALE, 2, 2, 2)
    inst = MilpInstance(topo, (wl(0, 10, 50),), allow_cross_rack=False)
    assert check_feasible(inst, Placement({0: ("cpu0", "mem1")}))
    res = solve_exact(inst)
    assert topo.module(res.placement[0][0]).rack == topo.module(res.placement[0][1]).rack


def test_oracle_refuses_large():
    inst = MilpInstance(build_topology(ArchitectureKind.RACK_SCALE, 20, 20, 2), tuple(generate_workloads(1, 20)))
    with pytest.raises(OracleRefusedError):
        brute_force_oracle(inst)


@pytest.mark.parametrize("pooled", [True, False])
def test_kernels_match_oracle(kernel, pooled):
    rnd = random.Random(2024)
    checked = tries = 0
    while checked < 60:
        tries += 1
        assert tries < 500
        inst = random_small_instance(rnd)
        try:
            want = brute_force_oracle(inst).objective
        except InfeasibleInstanceError:
            assert kernel_solve(inst, kernel, pooled)[0] is None
            continue
        got, placement, complete = kernel_solve(inst, kernel, pooled)
        assert complete
        assert check_feasible(inst, placement) == []
        assert abs(got - want) <= 1e-9 * max(1.0, abs(want))
        checked += 1


def test_greedy_never_beats_exact():
    rnd = random.Random(77)
    for _ in range(60):
        inst = random_small_instance(rnd)
        try:
            g = solve_greedy(inst)
        except Exception:
            continue
        assert g.objective >= solve_exact(inst).objective - 1e-9


@pytest.mark.parametrize("k", [2.0, 0.5, 4.0, 3.0])
def test_argmin_invariant_under_scaling(k):
    rnd = random.Random(11)
    done = 0
    while done < 8:
        inst = random_small_instance(rnd, max_workloads=4, max_modules=3)
        try:
            base, opt = enumerate_optimal(inst)
        except InfeasibleInstanceError:
            continue
        scaled = inst.scaled(k)
        sbase, sopt = enumerate_optimal(scaled)
        assert sopt == opt
        got = solve_exact(scaled).objective
        assert abs(got - k * solve_exact(inst).objective) <= 1e-9 * max(1.0, abs(got))
        if k in (2.0, 0.5, 4.0):
            # powers of two scale every product exactly
            assert sbase == k * base
        done += 1


def test_solve_is_deterministic():
    inst = MilpInstance(build_topology(ArchitectureKind.POD_SCALE, 20, 20, 2), tuple(generate_workloads(4, 20)))
    assert solve_exact(inst).to_dict() == solve_exact(inst).to_dict()


def test_proven_optimum_beats_any_feasible_placement():
    rnd = random.Random(5)
    for _ in range(20):
        inst = random_small_instance(rnd, max_workloads=4, max_modules=3)
        try:
            best = solve_exact(inst)
            _, optimal = enumerate_optimal(inst, rel_tol=1e-9)
        except InfeasibleInstanceError:
            continue
        assert best.proven_optimal
        assert best.placement in optimal
        try:
            assert best.objective <= solve_greedy(inst).objective + 1e-9
        except Exception:
            pass


def test_full_path_policy_reference():
    ws = tuple(generate_workloads(1, 20))
    for kind, racks in ((ArchitectureKind.RACK_SCALE, 2), (ArchitectureKind.POD_SCALE, 2)):
        inst = MilpInstance(build_topology(kind, 20, 20, racks), ws, TierPolicy.FULL_PATH)
        res = solve_exact(inst)
        assert res.proven_optimal and math.isfinite(res.objective)
