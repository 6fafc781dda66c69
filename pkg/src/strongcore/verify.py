"""Membership tests for the core and strong core, with certificates."""
from __future__ import annotations

from dataclasses import dataclass, field

from .errors import NotInStrongCore
from .graphs import Digraph, absorbing_sets, cycle_through, scc
from .market import Allocation, Arc, HousingMarket, iter_bits, restrict

WEAK = "WeakBlockingCycle"
STRICT = "StrictBlockingCycle"
PRICES = "PriceVector"
NONE = "None"


@dataclass(frozen=True)
class PreferenceSplitGraphs:
    indifferent: frozenset[Arc]
    better: frozenset[Arc]

    @property
    def weakly_better(self) -> frozenset[Arc]:
        return self.indifferent | self.better


@dataclass(frozen=True)
class Certificate:
    kind: str
    cycle: tuple[Arc, ...] = ()
    prices: tuple[int, ...] = ()

    def __bool__(self):
        return self.kind != NONE

    def to_dict(self, market: HousingMarket) -> dict:
        names = market.names
        if self.kind == PRICES:
            return {"kind": PRICES, "prices": {names[i]: p for i, p in enumerate(self.prices)}}
        if self.kind == NONE:
            return {"kind": NONE}
        return {"kind": self.kind, "cycle": [[names[a], names[b]] for a, b in self.cycle]}


NO_CERTIFICATE = Certificate(NONE)


def _rotated(cycle: list[Arc]) -> tuple[Arc, ...]:
    start = min(range(len(cycle)), key=lambda i: cycle[i][0])
    return tuple(cycle[start:] + cycle[:start])


def _split_masks(market: HousingMarket, x: Allocation) -> tuple[list[int], list[int]]:
    """Per-agent head masks of E[~X] and E[>X]."""
    indiff, better = [], []
    for a in range(market.n):
        below = market.prefs[a].below
        acc = market.acceptable_masks[a]
        xa = x[a]
        up = 0
        same = 0
        for b in iter_bits(acc):
            if below[b] >> xa & 1:
                up |= 1 << b
            elif not below[xa] >> b & 1:
                same |= 1 << b
        indiff.append(same)
        better.append(up)
    return indiff, better


def split_graphs(market: HousingMarket, x: Allocation) -> PreferenceSplitGraphs:
    indiff, better = _split_masks(market, x)
    return PreferenceSplitGraphs(
        frozenset((a, b) for a in range(market.n) for b in iter_bits(indiff[a])),
        frozenset((a, b) for a in range(market.n) for b in iter_bits(better[a])),
    )


def find_weak_blocking_cycle(market: HousingMarket, x: Allocation) -> Certificate:
    """A weakly blocking cycle through the least strictly-better arc, or no certificate."""
    indiff, better = _split_masks(market, x)
    weak = Digraph.from_masks([i | b for i, b in zip(indiff, better)])
    comp = scc(weak).component_of
    for a in range(market.n):
        for b in iter_bits(better[a]):
            if comp[a] == comp[b]:
                members = [v for v in range(market.n) if comp[v] == comp[a]]
                cycle = cycle_through(weak, (a, b), members)
                return Certificate(WEAK, _rotated(cycle))
    return NO_CERTIFICATE


def find_strict_blocking_cycle(market: HousingMarket, x: Allocation) -> Certificate:
    _, better = _split_masks(market, x)
    strict = Digraph.from_masks(better)
    comp = scc(strict).component_of
    for a in range(market.n):
        for b in iter_bits(better[a]):
            if comp[a] == comp[b]:
                members = [v for v in range(market.n) if comp[v] == comp[a]]
                return Certificate(STRICT, _rotated(cycle_through(strict, (a, b), members)))
    return NO_CERTIFICATE


def in_strong_core(market: HousingMarket, x: Allocation) -> bool:
    return not find_weak_blocking_cycle(market, x)


def in_core(market: HousingMarket, x: Allocation) -> bool:
    return not find_strict_blocking_cycle(market, x)


def peak_sets(market: HousingMarket, x: Allocation) -> list[frozenset[int]]:
    indiff, better = _split_masks(market, x)
    return absorbing_sets(Digraph.from_masks([i | b for i, b in zip(indiff, better)]))


@dataclass
class Characterization:
    holds: bool
    peak_set: frozenset[int] = frozenset()
    inner: dict[int, int] = field(default_factory=dict)
    outer: dict[int, int] = field(default_factory=dict)

    def __bool__(self):
        return self.holds


def check_peakset_characterization(market: HousingMarket, x: Allocation) -> Characterization:
    """Search the peak sets of ``x`` for a split satisfying the three-part strong-core test."""
    und = market.undominated_masks()
    for s in peak_sets(market, x):
        inner = {a: x[a] for a in s}
        if any(b not in s or not und[a] >> b & 1 for a, b in inner.items()):
            continue
        dominated = True
        for a in s:
            below_x = market.prefs[a].below[x[a]]
            for b in iter_bits(market.acceptable_masks[a]):
                if b not in s and not below_x >> b & 1:
                    dominated = False
                    break
            if not dominated:
                break
        if not dominated:
            continue
        rest = [a for a in range(market.n) if a not in s]
        outer = {a: x[a] for a in rest}
        if rest:
            sub = restrict(market, rest)
            pos = {old: new for new, old in enumerate(rest)}
            sub_x = Allocation(tuple(pos[x[a]] for a in rest))
            if find_weak_blocking_cycle(sub, sub_x):
                continue
        return Characterization(True, s, inner, outer)
    return Characterization(False)


def price_certificate(market: HousingMarket, x: Allocation) -> Certificate:
    """Integer prices in 1..n rising along strictly-better arcs, never falling along weakly-better ones."""
    indiff, better = _split_masks(market, x)
    weak = Digraph.from_masks([i | b for i, b in zip(indiff, better)])
    dec = scc(weak)
    comp = dec.component_of
    for a in range(market.n):
        for b in iter_bits(better[a]):
            if comp[a] == comp[b]:
                raise NotInStrongCore(
                    f"{market.names[a]} strictly prefers {market.names[b]} inside a weakly-better cycle")
    # components are numbered topologically, so the index is a valid price
    return Certificate(PRICES, prices=tuple(c + 1 for c in comp))


def check_prices(market: HousingMarket, x: Allocation, prices) -> bool:
    split = split_graphs(market, x)
    n = market.n
    if any(not 1 <= p <= n for p in prices):
        return False
    return all(prices[a] < prices[b] for a, b in split.better) and \
        all(prices[a] <= prices[b] for a, b in split.weakly_better)


def incomparability_audit(market: HousingMarket, allocations) -> bool:
    """Every agent is indifferent between (or identically served by) each pair of allocations."""
    allocations = list(allocations)
    for i, x in enumerate(allocations):
        for y in allocations[i + 1:]:
            for a in range(market.n):
                if x[a] != y[a] and not market.indifferent(a, x[a], y[a]):
                    return False
    return True
