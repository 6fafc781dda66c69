"""Strong core with forbidden arcs (and its forced-arc extension).

The solver works on a shrinking set of *active* agents instead of building
explicit submarkets; each pass over a new active set is one round of the
trace.  Within a round the candidate family of undominated-arc components is
pruned until every member admits an allocation whose arcs dominate everything
leaving the union of the family.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable

from .errors import InstanceTooLarge
from .graphs import Digraph, all_perfect_matchings, perfect_matching_allocation, scc
from .market import Allocation, Arc, HousingMarket, Instance, iter_bits, mask_of, max_oracle_n


@dataclass
class Iteration:
    tstar: frozenset[int]
    removed: list[frozenset[int]]


@dataclass
class Round:
    index: int
    agents: frozenset[int]
    components: list[frozenset[int]] = field(default_factory=list)
    initial: list[frozenset[int]] = field(default_factory=list)
    iterations: list[Iteration] = field(default_factory=list)
    final: list[frozenset[int]] = field(default_factory=list)
    tstar: frozenset[int] = frozenset()
    valid_arcs: dict[frozenset[int], list[Arc]] = field(default_factory=dict)
    chosen: dict[frozenset[int], dict[int, int]] = field(default_factory=dict)


@dataclass
class SolveTrace:
    rounds: list[Round] = field(default_factory=list)
    terminal: Allocation | None = None
    reason: str = ""

    def to_dict(self, market: HousingMarket) -> dict:
        names = market.names

        def agents(s):
            return sorted(names[i] for i in s)

        def family(fam):
            return [agents(s) for s in fam]

        rounds = []
        for r in self.rounds:
            rounds.append({
                "round": r.index,
                "agents": agents(r.agents),
                "components": family(r.components),
                "initial": family(r.initial),
                "iterations": [
                    {"tstar": agents(it.tstar), "removed": family(it.removed)} for it in r.iterations
                ],
                "final": family(r.final),
                "tstar": agents(r.tstar),
                "chosen": [
                    [[names[a], names[b]] for a, b in sorted(x.items())]
                    for _, x in sorted(r.chosen.items(), key=lambda kv: min(kv[0]))
                ],
            })
        out = {"rounds": rounds}
        if self.terminal is None:
            out["empty_reason"] = self.reason
        return out


def _arcs_within(masks: list[int], members: Iterable[int], inside: int, forbidden: frozenset[Arc]) -> dict[int, list[int]]:
    return {a: [b for b in iter_bits(masks[a] & inside) if (a, b) not in forbidden] for a in members}


def tstar_valid_arcs(market: HousingMarket, s: Iterable[int], tstar: Iterable[int],
                     forbidden: Iterable[Arc] = (), active: Iterable[int] | None = None) -> set[Arc]:
    """Undominated, non-forbidden arcs inside ``s`` that beat every arc leaving ``tstar``.

    Acceptability and domination are taken in the submarket on ``active``
    (the whole market by default).
    """
    forbidden = frozenset(forbidden)
    act = market.full_mask if active is None else mask_of(active)
    und = market.undominated_masks(act)
    s = sorted(s)
    return {(a, b) for a, heads in _valid_heads(market, und, s, mask_of(s), mask_of(tstar), act, forbidden).items()
            for b in heads}


def _valid_heads(market, und, members, s_mask, tstar_mask, active, forbidden) -> dict[int, list[int]]:
    out = {}
    for a in members:
        leaving = market.acceptable_masks[a] & active & ~tstar_mask
        below = market.prefs[a].below
        out[a] = [b for b in iter_bits(und[a] & s_mask)
                  if (a, b) not in forbidden and not (leaving & ~below[b])]
    return out


def _run(market: HousingMarket, forbidden: frozenset[Arc]):
    """Shared driver.  Returns (rounds, success, reason)."""
    rounds: list[Round] = []
    active = market.full_mask
    while True:
        r = Round(len(rounds), frozenset(iter_bits(active)))
        rounds.append(r)
        if len(r.agents) == 1:
            (a,) = r.agents
            comp = frozenset([a])
            r.components = [comp]
            if (a, a) in forbidden:
                return rounds, False, "single remaining agent has a forbidden loop"
            r.initial = r.final = [comp]
            r.tstar = comp
            r.valid_arcs[comp] = [(a, a)]
            r.chosen[comp] = {a: a}
            return rounds, True, ""
        und = market.undominated_masks(active)
        dec = scc(Digraph.from_masks(und), iter_bits(active))
        comps = [frozenset(c) for c in dec.components]
        r.components = comps
        family = []
        for comp in comps:
            cmask = mask_of(comp)
            arcs = _arcs_within(und, comp, cmask, forbidden)
            if perfect_matching_allocation(comp, arcs) is not None:
                family.append(comp)
        r.initial = list(family)
        while family:
            tstar_mask = 0
            for comp in family:
                tstar_mask |= mask_of(comp)
            tstar = frozenset(iter_bits(tstar_mask))
            removed = []
            chosen = {}
            valid = {}
            for comp in family:
                heads = _valid_heads(market, und, sorted(comp), mask_of(comp), tstar_mask, active, forbidden)
                x = perfect_matching_allocation(comp, heads)
                if x is None:
                    removed.append(comp)
                else:
                    chosen[comp] = x
                    valid[comp] = [(a, b) for a in sorted(heads) for b in heads[a]]
            r.iterations.append(Iteration(tstar, removed))
            if not removed:
                r.final = list(family)
                r.tstar = tstar
                r.chosen = chosen
                r.valid_arcs = valid
                break
            gone = set(removed)
            family = [c for c in family if c not in gone]
        else:
            return rounds, False, f"candidate family emptied in round {r.index}"
        active &= ~mask_of(r.tstar)
        if not active:
            return rounds, True, ""


def solve_scfa(instance: Instance) -> tuple[Allocation | None, SolveTrace]:
    """Strong-core allocation avoiding ``instance.forbidden``, or None with the trace."""
    if instance.forced:
        raise ValueError("instance has forced arcs; use solve_scffa")
    market = instance.market
    rounds, ok, reason = _run(market, frozenset(instance.forbidden))
    trace = SolveTrace(rounds, None, reason)
    if not ok:
        return None, trace
    heads = [0] * market.n
    for r in rounds:
        for x in r.chosen.values():
            for a, b in x.items():
                heads[a] = b
    trace.terminal = Allocation(tuple(heads))
    return trace.terminal, trace


def forced_to_forbidden(instance: Instance) -> frozenset[Arc]:
    """Forbid every other arc out of the tail of each forced arc."""
    market = instance.market
    extra = set(instance.forbidden)
    for a, b in instance.forced:
        for h in iter_bits(market.acceptable_masks[a]):
            if h != b:
                extra.add((a, h))
    return frozenset(extra)


def solve_scffa(instance: Instance) -> tuple[Allocation | None, SolveTrace]:
    reduced = Instance(instance.market, forced_to_forbidden(instance))
    return solve_scfa(reduced)


def enumerate_scfa_outputs(instance: Instance, max_n: int | None = None) -> set[Allocation]:
    """Every allocation the solver could return under some line-by-line choice.

    The families, T* sets and rounds do not depend on which valid allocation is
    stored for a component, so the outputs are the product of all valid
    allocations over (round, component).
    """
    market = instance.market
    limit = max_oracle_n() if max_n is None else max_n
    if market.n > limit:
        raise InstanceTooLarge(f"{market.n} agents exceeds enumeration bound {limit}")
    forbidden = forced_to_forbidden(instance) if instance.forced else frozenset(instance.forbidden)
    rounds, ok, _ = _run(market, forbidden)
    if not ok:
        return set()
    options = []
    for r in rounds:
        for comp in sorted(r.chosen, key=min):
            options.append(list(all_perfect_matchings(comp, r.valid_arcs[comp])))
    outputs = set()
    for combo in itertools.product(*options):
        heads = [0] * market.n
        for part in combo:
            for a, b in part.items():
                heads[a] = b
        outputs.add(Allocation(tuple(heads)))
    return outputs
