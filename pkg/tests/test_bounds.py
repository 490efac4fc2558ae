import itertools
import random

import pytest

from composedc.optimizer.bounds import BinTable, first_fit_decreasing, l1_bound, l2_bound, min_bins, pack_min


def brute_bins(sizes, cap):
    """Fewest bins by trying every assignment of items to bins."""
    n = len(sizes)
    if n == 0:
        return 0
    for k in range(1, n + 1):
        for assign in itertools.product(range(k), repeat=n):
            loads = [0] * k
            for s, b in zip(sizes, assign):
                loads[b] += s
            if max(loads) <= cap:
                return k
    return n


def test_classic_examples():
    assert min_bins([19, 19, 18, 18], 36) == 3
    assert first_fit_decreasing([19, 19, 18, 18], 36) == 3
    assert min_bins([], 10) == 0
    assert l1_bound([5, 5, 5], 10) == 2
    # L2 sees that three items above half the bin need three bins
    assert l2_bound([6, 6, 6], 10) == 3


def test_item_too_large():
    with pytest.raises(ValueError):
        min_bins([11], 10)


def test_exact_against_brute_force():
    rnd = random.Random(7)
    for _ in range(200):
        cap = rnd.randint(5, 30)
        sizes = [rnd.randint(1, cap) for _ in range(rnd.randint(0, 7))]
        want = brute_bins(sizes, cap)
        assert l1_bound(sizes, cap) <= l2_bound(sizes, cap) <= want <= first_fit_decreasing(sizes, cap)
        assert min_bins(sizes, cap) == want
        where = pack_min(sizes, cap)
        assert len(set(where)) == want
        loads = {}
        for s, b in zip(sizes, where):
            loads[b] = loads.get(b, 0) + s
        assert all(v <= cap for v in loads.values())


def test_node_limit_gives_lower_bound():
    rnd = random.Random(3)
    sizes = [rnd.randint(20, 60) for _ in range(40)]
    exact = min_bins(sizes, 100, node_limit=None)
    assert l2_bound(sizes, 100) <= min_bins(sizes, 100, node_limit=1) <= exact


def test_bin_table_drop():
    t = BinTable(36)
    items = (30, 20, 18, 10, 6)
    drop = t.drop(items)
    assert drop == [min_bins(list(items[k:]), 36) for k in range(len(items) + 1)]
    assert t.count(items) == drop[0]
