import pytest

from composedc.domain import (
    ArchitectureKind,
    Location,
    Module,
    ResourceKind,
    ResourceSpec,
    Topology,
    TopologyError,
    Workload,
    build_topology,
    locate,
)


def test_traditional_twenty_servers():
    t = build_topology(ArchitectureKind.TRADITIONAL, 20, 20, 1)
    assert len(t.boards) == 20
    for b in t.boards:
        members = [m for m in t.modules if m.board == b]
        assert sorted(m.kind.value for m in members) == ["cpu", "mem"]


def test_rackscale_smallest_pool():
    t = build_topology(ArchitectureKind.RACK_SCALE, 2, 2, 1)
    assert t.racks == (0,)
    assert len(t.cpus) == 2 and len(t.mems) == 2
    assert all(m.rack == 0 for m in t.modules)


def test_podscale_split_racks():
    t = build_topology(ArchitectureKind.POD_SCALE, 20, 20, 2)
    assert {m.rack for m in t.cpus} == {0}
    assert {m.rack for m in t.mems} == {1}


def test_locate_examples():
    trad = build_topology(ArchitectureKind.TRADITIONAL, 20, 20, 1)
    assert locate(trad, "cpu3") == Location("cpu3", 0, 3)
    assert locate(build_topology(ArchitectureKind.POD_SCALE, 20, 20, 2), "mem5").rack == 1
    assert locate(build_topology(ArchitectureKind.RACK_SCALE, 20, 20, 2), "cpu4").rack == 0


def test_locate_unknown_module():
    with pytest.raises(KeyError):
        locate(build_topology(ArchitectureKind.RACK_SCALE, 2, 2, 1), "cpu9")


@pytest.mark.parametrize("kind", list(ArchitectureKind))
@pytest.mark.parametrize("n,racks", [(4, 1), (4, 2), (6, 3), (20, 2)])
def test_layout_invariants(kind, n, racks):
    if kind is ArchitectureKind.POD_SCALE and racks < 2:
        with pytest.raises(TopologyError):
            build_topology(kind, n, n, racks)
        return
    t = build_topology(kind, n, n, racks)
    t.validate()
    assert len(t.cpus) == n and len(t.mems) == n
    assert len(t.boards) == (n if kind is ArchitectureKind.TRADITIONAL else 0)
    if kind is ArchitectureKind.POD_SCALE:
        for r in t.racks:
            assert len({m.kind for m in t.modules if m.rack == r}) == 1


@pytest.mark.parametrize(
    "args",
    [
        (ArchitectureKind.TRADITIONAL, 3, 4, 1),  # unequal server halves
        (ArchitectureKind.RACK_SCALE, 3, 4, 2),  # racks do not divide
        (ArchitectureKind.POD_SCALE, 4, 4, 1),  # needs two racks
        (ArchitectureKind.RACK_SCALE, 0, 4, 1),
        (ArchitectureKind.RACK_SCALE, 4, 4, 0),
    ],
)
def test_invalid_layouts(args):
    with pytest.raises(TopologyError):
        build_topology(*args)


def test_topology_rejects_mixed_pod_rack():
    cpu = ResourceSpec(ResourceKind.CPU, 36, 130.0, 0.3)
    mem = ResourceSpec(ResourceKind.MEM, 240, 40.0, 0.3)
    with pytest.raises(TopologyError):
        Topology(ArchitectureKind.POD_SCALE, (Module("cpu0", cpu, 0, 0), Module("mem0", mem, 0, 0)), (0,))


@pytest.mark.parametrize("bad", [dict(capacity=0), dict(peak_power=0.0), dict(dynamic_range=1.5)])
def test_spec_validation(bad):
    base = dict(kind=ResourceKind.CPU, capacity=36, peak_power=130.0, dynamic_range=0.3)
    with pytest.raises(ValueError):
        ResourceSpec(**{**base, **bad})


def test_workload_validation():
    with pytest.raises(ValueError):
        Workload(0, 0, 10, {})
    with pytest.raises(ValueError):
        Workload(0, 10, 10, {"cpu_mem_up": 1.0})


def test_workload_round_trip():
    from composedc.wlgen import generate_workloads

    for w in generate_workloads(5, 10):
        assert Workload.from_dict(w.to_dict()) == w
