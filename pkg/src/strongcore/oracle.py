"""Exhaustive ground truth at desk scale, plus Quint-Wako and TTC."""
from __future__ import annotations

from typing import Iterable, Iterator

from .errors import InstanceTooLarge, NotAWeakOrder
from .graphs import Digraph, absorbing_sets, perfect_matching_allocation
from .market import Allocation, Arc, HousingMarket, iter_bits, max_oracle_n
from .verify import find_strict_blocking_cycle, find_weak_blocking_cycle


def _guard(market: HousingMarket, max_n: int | None) -> None:
    limit = max_oracle_n() if max_n is None else max_n
    if market.n > limit:
        raise InstanceTooLarge(f"{market.n} agents exceeds oracle bound {limit}")


def enumerate_allocations(market: HousingMarket, max_n: int | None = None) -> Iterator[Allocation]:
    """All allocations respecting acceptability, lexicographic by head vector."""
    _guard(market, max_n)
    n = market.n
    acc = [market.acceptable(a) for a in range(n)]
    heads = [0] * n
    used = [False] * n

    def rec(a):
        if a == n:
            yield Allocation(tuple(heads))
            return
        for b in acc[a]:
            if not used[b]:
                used[b] = True
                heads[a] = b
                yield from rec(a + 1)
                used[b] = False

    return rec(0)


def simple_cycles(market: HousingMarket) -> Iterator[list[Arc]]:
    """Every simple cycle of the acceptability digraph, each listed once from its least agent."""
    n = market.n
    acc = [market.acceptable(a) for a in range(n)]
    for start in range(n):
        path = [start]
        on_path = {start}

        def rec(v):
            for w in acc[v]:
                if w == start:
                    nodes = path + [start]
                    yield list(zip(nodes, nodes[1:]))
                elif w > start and w not in on_path:
                    path.append(w)
                    on_path.add(w)
                    yield from rec(w)
                    path.pop()
                    on_path.discard(w)

        yield from rec(start)


def blocks(market: HousingMarket, x: Allocation, cycle: Iterable[Arc], strictly: bool = False) -> bool:
    """Direct reading of the blocking definitions for one cycle."""
    some_better = False
    for a, b in cycle:
        better = market.prefers(a, b, x[a])
        if strictly and not better:
            return False
        if not market.weakly_prefers(a, b, x[a]):
            return False
        some_better |= better
    return some_better


def has_blocking_cycle_bruteforce(market: HousingMarket, x: Allocation, strictly: bool = False,
                                  cycles: list[list[Arc]] | None = None) -> bool:
    if cycles is None:
        cycles = simple_cycles(market)
    return any(blocks(market, x, c, strictly) for c in cycles)


def _avoids(x: Allocation, forbidden) -> bool:
    return not any((a, b) in forbidden for a, b in enumerate(x.assignment))


def strong_core_set(market: HousingMarket, forbidden: Iterable[Arc] = (), max_n: int | None = None,
                    method: str = "scc") -> set[Allocation]:
    """All forbidden-avoiding strong-core allocations.

    ``method="brute"`` tests every simple cycle against the definition instead of
    using the component-based detector.
    """
    forbidden = frozenset(forbidden)
    allocations = [x for x in enumerate_allocations(market, max_n) if _avoids(x, forbidden)]
    if method == "brute":
        cycles = list(simple_cycles(market))
        return {x for x in allocations if not has_blocking_cycle_bruteforce(market, x, cycles=cycles)}
    if method != "scc":
        raise ValueError(f"unknown method {method!r}")
    return {x for x in allocations if not find_weak_blocking_cycle(market, x)}


def core_set(market: HousingMarket, forbidden: Iterable[Arc] = (), max_n: int | None = None) -> set[Allocation]:
    forbidden = frozenset(forbidden)
    return {x for x in enumerate_allocations(market, max_n)
            if _avoids(x, forbidden) and not find_strict_blocking_cycle(market, x)}


def is_weak_order_market(market: HousingMarket) -> bool:
    return all(rel.order_class() != "partial" for rel in market.prefs)


def quint_wako_weak(market: HousingMarket, forbidden: Iterable[Arc] = ()) -> Allocation | None:
    """Peel absorbing sets of the undominated-arc digraph; weak orders only."""
    for a, rel in enumerate(market.prefs):
        if rel.order_class() == "partial":
            raise NotAWeakOrder(f"indifference of {market.names[a]} is not transitive")
    forbidden = frozenset(forbidden)
    heads = [0] * market.n
    active = market.full_mask
    while active:
        und = market.undominated_masks(active)
        s = absorbing_sets(Digraph.from_masks(und), iter_bits(active))[0]
        allowed = {a: [b for b in iter_bits(und[a]) if b in s and (a, b) not in forbidden] for a in s}
        x = perfect_matching_allocation(s, allowed)
        if x is None:
            return None
        for a, b in x.items():
            heads[a] = b
            active &= ~(1 << a)
    return Allocation(tuple(heads))


def ttc_core(market: HousingMarket) -> Allocation:
    """Top trading cycles on undominated arcs.

    From the least remaining agent, repeatedly follow each agent's least
    undominated head until an agent repeats; the closed cycle trades.
    """
    heads = [0] * market.n
    active = market.full_mask
    while active:
        und = market.undominated_masks(active)
        start = (active & -active).bit_length() - 1
        seen = {}
        walk = []
        v = start
        while v not in seen:
            seen[v] = len(walk)
            walk.append(v)
            m = und[v]
            v = (m & -m).bit_length() - 1
        cycle = walk[seen[v]:]
        for i, a in enumerate(cycle):
            heads[a] = cycle[(i + 1) % len(cycle)]
            active &= ~(1 << a)
    return Allocation(tuple(heads))
