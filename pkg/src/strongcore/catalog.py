"""Small hand-built markets that exercise the interesting corner cases.

Each market is described the same way: an acceptability list per agent where
every acceptable house beats the agent's own, every other house ranks below
it, plus a few extra strict comparisons.
"""
from __future__ import annotations

from typing import Mapping, Sequence

from .market import Allocation, HousingMarket, Instance


def market_from_acceptability(names: Sequence[str], acceptable: Mapping[str, Sequence[str]],
                              extra: Sequence[tuple[str, str, str]] = ()) -> HousingMarket:
    """``extra`` holds ``(agent, better, worse)`` triples."""
    idx = {name: i for i, name in enumerate(names)}
    pairs: dict[int, list[tuple[int, int]]] = {i: [] for i in range(len(names))}
    for x in names:
        a = idx[x]
        acc = set(acceptable.get(x, ())) | {x}
        for y in names:
            if y == x:
                continue
            if y in acc:
                pairs[a].append((idx[y], a))
            else:
                pairs[a].append((a, idx[y]))
    for x, better, worse in extra:
        pairs[idx[x]].append((idx[better], idx[worse]))
    return HousingMarket.from_pairs(names, pairs)


def allocation(market: HousingMarket, *arcs: tuple[str, str]) -> Allocation:
    return Allocation.from_arcs(market.n, [(market.index(a), market.index(b)) for a, b in arcs])


def empty_core_market() -> HousingMarket:
    """Both undominated 3-cycles on {a,b,c} are blocked through d; strong core empty."""
    names = ["a", "b", "c", "d"]
    return market_from_acceptability(
        names,
        {"a": names, "b": names, "c": ["a", "b", "c"], "d": ["c", "d"]},
        [("a", "c", "d"), ("b", "c", "d")],
    )


def double_triangle_market() -> HousingMarket:
    """Strong core holds both 3-cycles on {a,b,c}, each with the d1-d2 swap."""
    names = ["a", "b", "c", "d1", "d2"]
    everyone = set(names)
    return market_from_acceptability(
        names,
        {
            "a": sorted(everyone - {"d2"}),
            "b": sorted(everyone - {"d1"}),
            "c": ["a", "b", "c"],
            "d1": ["c", "d1", "d2"],
            "d2": ["d1", "d2"],
        },
        [("a", "c", "d1"), ("b", "c", "d2")],
    )


def hidden_allocation_market() -> HousingMarket:
    """Two strong-core allocations of which the solver can only ever produce one."""
    names = ["a", "b", "c", "d1", "d2"]
    most = [x for x in names if x != "d2"]
    return market_from_acceptability(
        names,
        {"a": most, "b": most, "c": most, "d1": ["d1", "d2"], "d2": ["d1", "d2"]},
        [("a", "d1", "b"), ("b", "d1", "c"), ("c", "d1", "a")],
    )


def improvement_base_market() -> HousingMarket:
    names = ["a", "b", "c", "d"]
    return market_from_acceptability(
        names,
        {"a": ["a", "b"], "b": ["a", "b"], "c": ["a", "c", "d"], "d": ["c", "d"]},
        [("c", "a", "d")],
    )


def improvement_kept_market() -> HousingMarket:
    """Base market after b starts accepting c: c trades up to a."""
    names = ["a", "b", "c", "d"]
    return market_from_acceptability(
        names,
        {"a": ["a", "b"], "b": ["a", "b", "c"], "c": ["a", "c", "d"], "d": ["c", "d"]},
        [("c", "a", "d")],
    )


def improvement_emptied_market() -> HousingMarket:
    """Base market after a starts accepting c: strong core becomes empty."""
    names = ["a", "b", "c", "d"]
    return market_from_acceptability(
        names,
        {"a": ["a", "b", "c"], "b": ["a", "b"], "c": ["a", "c", "d"], "d": ["c", "d"]},
        [("c", "a", "d")],
    )


CATALOG = {
    "empty-core": empty_core_market,
    "double-triangle": double_triangle_market,
    "hidden-allocation": hidden_allocation_market,
    "improvement-base": improvement_base_market,
    "improvement-kept": improvement_kept_market,
    "improvement-emptied": improvement_emptied_market,
}


def catalog_instance(name: str) -> Instance:
    return Instance(CATALOG[name]())
