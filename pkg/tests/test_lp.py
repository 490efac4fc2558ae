import random

from composedc.domain import ArchitectureKind, build_topology
from composedc.optimizer import InfeasibleInstanceError, MilpInstance, export_lp, objective_value, solve_exact, solve_greedy
from composedc.optimizer.lp import MAX_LINE, binary_names, evaluate_objective, indicator, parse_lp, violated_constraints
from composedc.wlgen import generate_workloads

from conftest import random_small_instance, wl


def test_first_line_and_binary_count():
    inst = MilpInstance(build_topology(ArchitectureKind.RACK_SCALE, 2, 2, 1), (wl(0, 20, 60), wl(1, 20, 60)))
    text = export_lp(inst)
    assert text.split("\n", 1)[0] == "Minimize"
    model = parse_lp(text)
    assert len(model.binaries) == 20 == len(binary_names(inst))
    assert text.rstrip().endswith("End")


def test_lines_fit_and_deterministic():
    inst = MilpInstance(build_topology(ArchitectureKind.POD_SCALE, 20, 20, 2), tuple(generate_workloads(1, 20)))
    text = export_lp(inst)
    assert text == export_lp(inst)
    assert max(len(line) for line in text.split("\n")) <= MAX_LINE


def test_objective_at_indicator_matches():
    rnd = random.Random(42)
    checked = 0
    while checked < 25:
        inst = random_small_instance(rnd)
        try:
            placements = [solve_exact(inst).placement]
        except InfeasibleInstanceError:
            continue
        try:
            placements.append(solve_greedy(inst).placement)
        except Exception:
            pass
        model = parse_lp(export_lp(inst))
        for p in placements:
            values = indicator(inst, p)
            assert violated_constraints(model, values) == []
            want = objective_value(inst, p)
            assert abs(evaluate_objective(model, values) - want) <= 1e-9 * max(1.0, want)
        checked += 1


def test_infeasible_placement_violates_constraints():
    inst = MilpInstance(build_topology(ArchitectureKind.RACK_SCALE, 2, 2, 1), (wl(0, 20, 60), wl(1, 20, 60)))
    from composedc.domain import Placement

    values = indicator(inst, Placement({0: ("cpu0", "mem0"), 1: ("cpu0", "mem0")}))
    assert violated_constraints(parse_lp(export_lp(inst)), values)
