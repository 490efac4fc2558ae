"""Bin-packing bounds and exact packing for identical modules."""

from __future__ import annotations

from typing import Optional, Sequence


def _ceil_div(a: int, b: int) -> int:
    return -(-a // b)


def l1_bound(sizes: Sequence[int], cap: int) -> int:
    return _ceil_div(sum(sizes), cap) if sizes else 0


def l2_bound(sizes: Sequence[int], cap: int) -> int:
    """Martello-Toth L2 bound for one-dimensional bin packing."""
    if not sizes:
        return 0
    best = l1_bound(sizes, cap)
    alphas = {0} | {s for s in sizes if 2 * s <= cap}
    for a in alphas:
        j1 = [s for s in sizes if s > cap - a]
        j2 = [s for s in sizes if cap - a >= s and 2 * s > cap]
        j3 = [s for s in sizes if 2 * s <= cap and s >= a]
        spare = len(j2) * cap - sum(j2)
        extra = max(0, _ceil_div(sum(j3) - spare, cap))
        best = max(best, len(j1) + len(j2) + extra)
    return best


def _ffd(items: Sequence[int], cap: int) -> list[int]:
    """First-fit bin index for each item (items already in descending order)."""
    loads: list[int] = []
    out = []
    for s in items:
        for i, load in enumerate(loads):
            if load + s <= cap:
                loads[i] = load + s
                out.append(i)
                break
        else:
            loads.append(s)
            out.append(len(loads) - 1)
    return out


def first_fit_decreasing(sizes: Sequence[int], cap: int) -> int:
    return len(set(_ffd(sorted(sizes, reverse=True), cap)))


class _Abort(Exception):
    pass


def _fit(items: Sequence[int], cap: int, target: int, budget: list[int]) -> Optional[list[int]]:
    """Bin index per item packing ``items`` (descending) into ``target`` bins, or None."""
    n = len(items)
    suffix = [0] * (n + 1)
    for i in range(n - 1, -1, -1):
        suffix[i] = suffix[i + 1] + items[i]
    loads: list[int] = []
    where = [0] * n
    failed: set = set()  # (next item, sorted loads) states with no completion

    def rec(i: int) -> bool:
        budget[0] -= 1
        if budget[0] < 0:
            raise _Abort
        if i == n:
            return True
        key = (i, tuple(sorted(loads)))
        if key in failed:
            return False
        # Space below the smallest remaining item can never be used.
        small = items[n - 1]
        free = (target - len(loads)) * cap
        for l in loads:
            if cap - l >= small:
                free += cap - l
        if suffix[i] > free:
            return False
        s = items[i]
        seen = set()
        for b in range(len(loads)):
            if loads[b] + s <= cap and loads[b] not in seen:
                seen.add(loads[b])
                loads[b] += s
                where[i] = b
                if rec(i + 1):
                    return True
                loads[b] -= s
        if len(loads) < target:
            loads.append(s)
            where[i] = len(loads) - 1
            if rec(i + 1):
                return True
            loads.pop()
        failed.add(key)
        return False

    return list(where) if rec(0) else None


def _pack(items: Sequence[int], cap: int, node_limit: Optional[int]) -> tuple[int, Optional[list[int]]]:
    """``(bins, assignment)`` for descending ``items``.

    On hitting ``node_limit`` the assignment is None and ``bins`` is the best
    proven lower bound.
    """
    if any(s > cap for s in items):
        raise ValueError("an item exceeds the bin capacity")
    if not items:
        return 0, []
    lower = l2_bound(items, cap)
    ffd = _ffd(items, cap)
    upper = max(ffd) + 1
    if lower >= upper:
        return upper, ffd
    budget = [node_limit if node_limit is not None else float("inf")]
    for target in range(lower, upper):
        try:
            where = _fit(items, cap, target, budget)
        except _Abort:
            return target, None
        if where is not None:
            return target, where
    return upper, ffd


def min_bins(sizes: Sequence[int], cap: int, node_limit: Optional[int] = 200_000) -> int:
    """Fewest bins of capacity ``cap`` holding ``sizes``.

    Exact when the search finishes within ``node_limit`` (None: no limit);
    otherwise the best proven lower bound, so the result is always safe to
    use as a bound.
    """
    return _pack(sorted(sizes, reverse=True), cap, node_limit)[0]


def pack_min(sizes: Sequence[int], cap: int) -> list[int]:
    """Bin index per item (input order) for a packing with the fewest bins.

    Items are packed largest first (ties by input position) and bins are
    numbered in the order they are opened, so the result is deterministic.
    """
    order = sorted(range(len(sizes)), key=lambda i: (-sizes[i], i))
    _, where = _pack([sizes[i] for i in order], cap, None)
    out = [0] * len(sizes)
    for k, i in enumerate(order):
        out[i] = where[k]
    return out


class BinTable:
    """Memoised exact bin counts for descending item tuples of one capacity."""

    def __init__(self, cap: int) -> None:
        self.cap = cap
        self._count: dict[tuple, int] = {}
        self._drop: dict[tuple, list[int]] = {}

    def count(self, items: tuple) -> int:
        hit = self._count.get(items)
        if hit is None:
            hit = _pack(items, self.cap, None)[0]
            self._count[items] = hit
        return hit

    def drop(self, items: tuple) -> list[int]:
        """``out[t]``: bins needed once the ``t`` largest items are removed.

        Removing the largest items leaves the easiest remainder, so
        ``out[t] <= k`` is necessary for any ``t`` removals to fit ``k`` bins.
        """
        hit = self._drop.get(items)
        if hit is None:
            hit = [self.count(items[t:]) for t in range(len(items) + 1)]
            self._drop[items] = hit
        return hit
