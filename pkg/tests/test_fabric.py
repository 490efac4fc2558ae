import pytest

from composedc.domain import DEFAULT_EPB, ArchitectureKind, EpbTable, FlowKind, Placement, Tier, build_topology, locate
from composedc.fabric import GATEWAY, FabricError, TierPolicy, network_power_by_tier, tier_set, traffic_by_tier

from conftest import wl


def test_rackscale_same_rack_backplane():
    t = build_topology(ArchitectureKind.RACK_SCALE, 2, 2, 1)
    assert tier_set(t, TierPolicy.TOP_TIER, FlowKind.CPU_MEM_UP, locate(t, "cpu0"), locate(t, "mem1")) == (
        Tier.RACK_BACKPLANE,
    )


def test_podscale_cross_rack():
    t = build_topology(ArchitectureKind.POD_SCALE, 2, 2, 2)
    assert tier_set(t, TierPolicy.TOP_TIER, FlowKind.CPU_MEM_DOWN, locate(t, "cpu0"), locate(t, "mem0")) == (
        Tier.INTER_RACK,
    )


def test_full_path_io_route():
    t = build_topology(ArchitectureKind.RACK_SCALE, 2, 2, 1)
    got = tier_set(t, TierPolicy.FULL_PATH, FlowKind.CPU_IO_UP, locate(t, "cpu0"), GATEWAY)
    assert sorted(got) == [Tier.RACK_BACKPLANE, Tier.INTER_RACK, Tier.INTER_DC]


def test_flow_endpoint_mismatch():
    t = build_topology(ArchitectureKind.RACK_SCALE, 2, 2, 1)
    with pytest.raises(FabricError):
        tier_set(t, TierPolicy.TOP_TIER, FlowKind.CPU_MEM_UP, locate(t, "cpu0"), GATEWAY)
    with pytest.raises(FabricError):
        tier_set(t, TierPolicy.TOP_TIER, FlowKind.CPU_IO_UP, locate(t, "cpu0"), locate(t, "mem0"))


def test_single_workload_traffic():
    trad = build_topology(ArchitectureKind.TRADITIONAL, 1, 1, 1)
    got = traffic_by_tier(trad, [wl(0, 10, 50)], Placement({0: ("cpu0", "mem0")}), TierPolicy.TOP_TIER)
    assert got == {Tier.ON_BOARD: 220.0, Tier.RACK_BACKPLANE: 0.0, Tier.INTER_RACK: 0.0, Tier.INTER_DC: 6.0}
    pod = build_topology(ArchitectureKind.POD_SCALE, 1, 1, 2)
    got = traffic_by_tier(pod, [wl(0, 10, 50)], Placement({0: ("cpu0", "mem0")}), TierPolicy.TOP_TIER)
    assert got[Tier.INTER_RACK] == 220.0 and got[Tier.INTER_DC] == 6.0


def test_zero_workloads_zero_traffic():
    t = build_topology(ArchitectureKind.POD_SCALE, 1, 1, 2)
    assert set(traffic_by_tier(t, [], Placement({}), TierPolicy.TOP_TIER).values()) == {0.0}


def test_network_power_examples():
    power, total = network_power_by_tier({Tier.RACK_BACKPLANE: 220.0}, DEFAULT_EPB)
    assert abs(power[Tier.RACK_BACKPLANE] - 5.5) <= 1e-12 and total == power[Tier.RACK_BACKPLANE]
    power, total = network_power_by_tier({Tier.INTER_DC: 6.0}, DEFAULT_EPB)
    assert abs(total - 3.0) <= 1e-12
    assert network_power_by_tier({}, DEFAULT_EPB)[1] == 0.0


def test_moving_memory_off_rack_never_cheaper():
    t = build_topology(ArchitectureKind.RACK_SCALE, 2, 2, 2)
    ws = [wl(0, 10, 50)]
    local = traffic_by_tier(t, ws, Placement({0: ("cpu0", "mem0")}), TierPolicy.TOP_TIER)
    remote = traffic_by_tier(t, ws, Placement({0: ("cpu0", "mem1")}), TierPolicy.TOP_TIER)
    assert local[Tier.RACK_BACKPLANE] == 220.0 and remote[Tier.INTER_RACK] == 220.0
    assert network_power_by_tier(remote, DEFAULT_EPB)[1] >= network_power_by_tier(local, DEFAULT_EPB)[1]


def test_epb_validation():
    with pytest.raises(ValueError):
        EpbTable(on_board=-1.0)
    with pytest.raises(ValueError):
        EpbTable.from_dict({"warp": 1.0})
