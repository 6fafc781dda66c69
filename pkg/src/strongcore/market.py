"""Agents, partial-order preferences, housing markets, allocations and instances.

Preferences are stored per agent as *below-sets*: for the relation of agent
``a``, ``below[b]`` is an integer bitmask whose bit ``c`` is set iff
``b`` is strictly preferred to ``c`` by ``a``.  Relations are kept
transitively closed, so every comparison is a single bit test.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import (
    ConflictingRestriction,
    CycleInStrictRelation,
    EmptySubset,
    InvalidAllocation,
    MalformedDocument,
    NonEdgeRestriction,
    UnknownAgent,
)

Arc = tuple[int, int]

DEFAULT_MAX_ORACLE_N = 8


def max_oracle_n(default: int = DEFAULT_MAX_ORACLE_N) -> int:
    """Desk-scale guard for exhaustive routines, overridable from the environment."""
    value = os.environ.get("STRONGCORE_MAX_ORACLE_N")
    if value is None:
        return default
    try:
        return int(value)
    except ValueError:
        return default


def iter_bits(mask: int) -> Iterator[int]:
    """Yield the indices of the set bits of ``mask`` in increasing order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def mask_of(items: Iterable[int]) -> int:
    mask = 0
    for i in items:
        mask |= 1 << i
    return mask


def _close(n: int, direct: list[int]) -> list[int]:
    # Kahn order on the pair graph; a leftover vertex means a cycle.
    indeg = [0] * n
    for b in range(n):
        for c in iter_bits(direct[b]):
            indeg[c] += 1
    order = [b for b in range(n) if indeg[b] == 0]
    head = 0
    while head < len(order):
        b = order[head]
        head += 1
        for c in iter_bits(direct[b]):
            indeg[c] -= 1
            if indeg[c] == 0:
                order.append(c)
    if len(order) != n:
        bad = next(b for b in range(n) if indeg[b] > 0)
        raise CycleInStrictRelation(f"strict pairs imply a cycle through index {bad}")
    closed = list(direct)
    for b in reversed(order):
        acc = direct[b]
        for c in iter_bits(direct[b]):
            acc |= closed[c]
        closed[b] = acc
    return closed


@dataclass(frozen=True)
class PreferenceRelation:
    """Strict partial order of one agent over all agents, transitively closed."""

    owner: int
    below: tuple[int, ...]

    @classmethod
    def from_pairs(cls, owner: int, n: int, pairs: Iterable[Arc]) -> "PreferenceRelation":
        """Build the closed relation generated by ``pairs`` (``(b, c)`` means b above c)."""
        direct = [0] * n
        for b, c in pairs:
            if not (0 <= b < n and 0 <= c < n):
                raise UnknownAgent(f"pair ({b}, {c}) outside 0..{n - 1}")
            if b == c:
                raise CycleInStrictRelation(f"reflexive pair ({b}, {b})")
            direct[b] |= 1 << c
        return cls(owner, tuple(_close(n, direct)))

    @classmethod
    def from_masks(cls, owner: int, masks: Sequence[int]) -> "PreferenceRelation":
        """Close a relation given as direct below-masks."""
        return cls(owner, tuple(_close(len(masks), list(masks))))

    @property
    def n(self) -> int:
        return len(self.below)

    def prefers(self, b: int, c: int) -> bool:
        return bool(self.below[b] >> c & 1)

    def weakly_prefers(self, b: int, c: int) -> bool:
        return not self.below[c] >> b & 1

    def indifferent(self, b: int, c: int) -> bool:
        return not (self.below[b] >> c & 1 or self.below[c] >> b & 1)

    @cached_property
    def strict_pairs(self) -> frozenset[Arc]:
        return frozenset((b, c) for b in range(self.n) for c in iter_bits(self.below[b]))

    def cover_pairs(self) -> list[Arc]:
        """Transitive reduction, the smallest pair list generating this relation."""
        out = []
        for b in range(self.n):
            implied = 0
            for c in iter_bits(self.below[b]):
                implied |= self.below[c]
            for c in iter_bits(self.below[b] & ~implied):
                out.append((b, c))
        return out

    def order_class(self) -> str:
        """'strict' for a total order, 'weak' when indifference is transitive, else 'partial'."""
        groups: dict[int, int] = {}
        for b, m in enumerate(self.below):
            groups[m] = groups.get(m, 0) | 1 << b
        masks = sorted(groups, key=lambda m: m.bit_count())
        for lo, hi in zip(masks, masks[1:]):
            # distinct below-sets must be nested and the lower class lies below the upper
            if lo & ~hi or groups[lo] & ~hi:
                return "partial"
        if len(masks) == self.n:
            return "strict"
        return "weak"

    def is_closed(self) -> bool:
        for b in range(self.n):
            if self.below[b] >> b & 1:
                return False
            for c in iter_bits(self.below[b]):
                if self.below[c] & ~self.below[b]:
                    return False
        return True


@dataclass(frozen=True)
class HousingMarket:
    """Agent names plus one closed preference relation per agent."""

    names: tuple[str, ...]
    prefs: tuple[PreferenceRelation, ...]

    def __post_init__(self):
        if len(set(self.names)) != len(self.names):
            raise MalformedDocument("agent names must be unique")
        if len(self.prefs) != len(self.names):
            raise MalformedDocument("need exactly one preference relation per agent")
        for a, rel in enumerate(self.prefs):
            if rel.owner != a or rel.n != len(self.names):
                raise MalformedDocument(f"relation {a} has wrong owner or size")

    @classmethod
    def from_pairs(cls, names: Sequence[str], pairs: Mapping[int, Iterable[Arc]]) -> "HousingMarket":
        n = len(names)
        return cls(tuple(names), tuple(PreferenceRelation.from_pairs(a, n, pairs.get(a, ())) for a in range(n)))

    @property
    def n(self) -> int:
        return len(self.names)

    @cached_property
    def full_mask(self) -> int:
        return (1 << self.n) - 1

    @cached_property
    def acceptable_masks(self) -> tuple[int, ...]:
        full = self.full_mask
        return tuple(full & ~rel.below[a] for a, rel in enumerate(self.prefs))

    def acceptable(self, a: int) -> list[int]:
        return list(iter_bits(self.acceptable_masks[a]))

    def prefers(self, a: int, b: int, c: int) -> bool:
        """True iff agent ``a`` strictly prefers ``b`` to ``c``."""
        return bool(self.prefs[a].below[b] >> c & 1)

    def weakly_prefers(self, a: int, b: int, c: int) -> bool:
        return not self.prefs[a].below[c] >> b & 1

    def indifferent(self, a: int, b: int, c: int) -> bool:
        below = self.prefs[a].below
        return not (below[b] >> c & 1 or below[c] >> b & 1)

    @cached_property
    def arcs(self) -> tuple[Arc, ...]:
        return tuple((a, b) for a in range(self.n) for b in iter_bits(self.acceptable_masks[a]))

    def has_arc(self, a: int, b: int) -> bool:
        return bool(self.acceptable_masks[a] >> b & 1)

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise UnknownAgent(f"unknown agent {name!r}") from None

    @cached_property
    def _index(self) -> dict[str, int]:
        return {name: i for i, name in enumerate(self.names)}

    def undominated_masks(self, active: int | None = None) -> list[int]:
        """Per agent, heads of undominated arcs within the submarket on ``active``.

        Inactive agents get 0.
        """
        if active is None:
            active = self.full_mask
        out = [0] * self.n
        for a in iter_bits(active):
            below = self.prefs[a].below
            acc = self.acceptable_masks[a] & active
            dominated = 0
            for b in iter_bits(acc):
                dominated |= below[b]
            out[a] = acc & ~dominated
        return out

    def check_allocation(self, x: "Allocation") -> None:
        if x.n != self.n:
            raise InvalidAllocation(f"allocation covers {x.n} agents, market has {self.n}")
        for a, b in enumerate(x.assignment):
            if not self.has_arc(a, b):
                raise InvalidAllocation(f"{self.names[b]} is not acceptable to {self.names[a]}")


def underlying_graph(market: HousingMarket) -> frozenset[Arc]:
    """Arc set of the acceptability digraph, loops included."""
    return frozenset(market.arcs)


def undominated_arcs(market: HousingMarket) -> frozenset[Arc]:
    masks = market.undominated_masks()
    return frozenset((a, b) for a in range(market.n) for b in iter_bits(masks[a]))


def restrict(market: HousingMarket, subset: Iterable[int]) -> HousingMarket:
    """Submarket on ``subset``; agents are re-indexed in increasing order."""
    keep = sorted(set(subset))
    if not keep:
        raise EmptySubset("cannot restrict a market to no agents")
    if keep == list(range(market.n)):
        return market
    new_index = {old: new for new, old in enumerate(keep)}
    prefs = []
    for new_a, old_a in enumerate(keep):
        below = market.prefs[old_a].below
        masks = []
        for old_b in keep:
            m = 0
            for old_c in iter_bits(below[old_b]):
                j = new_index.get(old_c)
                if j is not None:
                    m |= 1 << j
            masks.append(m)
        prefs.append(PreferenceRelation(new_a, tuple(masks)))
    return HousingMarket(tuple(market.names[i] for i in keep), tuple(prefs))


@dataclass(frozen=True)
class Allocation:
    """A permutation of agents; ``assignment[a]`` is the house agent ``a`` receives."""

    assignment: tuple[int, ...]

    def __post_init__(self):
        if sorted(self.assignment) != list(range(len(self.assignment))):
            raise InvalidAllocation("assignment is not a permutation")

    @classmethod
    def from_arcs(cls, n: int, arcs: Iterable[Arc]) -> "Allocation":
        heads = [-1] * n
        for a, b in arcs:
            if not (0 <= a < n and 0 <= b < n):
                raise InvalidAllocation(f"arc ({a}, {b}) out of range")
            if heads[a] != -1:
                raise InvalidAllocation(f"agent {a} has two outgoing arcs")
            heads[a] = b
        if -1 in heads:
            raise InvalidAllocation("some agent has no outgoing arc")
        return cls(tuple(heads))

    @classmethod
    def identity(cls, n: int) -> "Allocation":
        return cls(tuple(range(n)))

    @property
    def n(self) -> int:
        return len(self.assignment)

    def __getitem__(self, a: int) -> int:
        return self.assignment[a]

    @property
    def arcs(self) -> tuple[Arc, ...]:
        return tuple(enumerate(self.assignment))

    def to_names(self, market: HousingMarket) -> dict[str, str]:
        return {market.names[a]: market.names[b] for a, b in enumerate(self.assignment)}


@dataclass(frozen=True)
class Instance:
    market: HousingMarket
    forbidden: frozenset[Arc] = field(default_factory=frozenset)
    forced: frozenset[Arc] = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "forbidden", frozenset(self.forbidden))
        object.__setattr__(self, "forced", frozenset(self.forced))
        m = self.market
        for label, arcs in (("forbidden", self.forbidden), ("forced", self.forced)):
            for a, b in arcs:
                if not (0 <= a < m.n and 0 <= b < m.n):
                    raise UnknownAgent(f"{label} arc ({a}, {b}) out of range")
                if not m.has_arc(a, b):
                    raise NonEdgeRestriction(f"{label} arc ({m.names[a]}, {m.names[b]}) is not an arc")
        both = self.forbidden & self.forced
        if both:
            a, b = min(both)
            raise ConflictingRestriction(f"arc ({m.names[a]}, {m.names[b]}) is both forced and forbidden")
        tails = [a for a, _ in self.forced]
        if len(tails) != len(set(tails)):
            raise ConflictingRestriction("two forced arcs share a tail")


# --- JSON instance format -------------------------------------------------

def _pair(item, what) -> tuple[str, str]:
    if not (isinstance(item, (list, tuple)) and len(item) == 2 and all(isinstance(s, str) for s in item)):
        raise MalformedDocument(f"{what} entries must be [name, name] pairs, got {item!r}")
    return item[0], item[1]


def parse_instance(text: str | bytes) -> Instance:
    """Parse and validate a JSON instance document."""
    try:
        doc = json.loads(text)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise MalformedDocument(f"invalid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise MalformedDocument("top-level value must be an object")
    agents = doc.get("agents")
    if not isinstance(agents, list) or not agents or not all(isinstance(s, str) for s in agents):
        raise MalformedDocument('"agents" must be a nonempty list of names')
    if len(set(agents)) != len(agents):
        raise MalformedDocument("duplicate agent names")
    index = {name: i for i, name in enumerate(agents)}

    def idx(name):
        try:
            return index[name]
        except KeyError:
            raise UnknownAgent(f"unknown agent {name!r}") from None

    prefs_doc = doc.get("preferences", {})
    if not isinstance(prefs_doc, dict):
        raise MalformedDocument('"preferences" must be an object')
    pairs: dict[int, list[Arc]] = {}
    for owner_name, spec in prefs_doc.items():
        a = idx(owner_name)
        if not isinstance(spec, dict):
            raise MalformedDocument(f"preferences of {owner_name!r} must be an object")
        unknown_keys = set(spec) - {"unacceptable", "strict"}
        if unknown_keys:
            raise MalformedDocument(f"unexpected keys {sorted(unknown_keys)} for {owner_name!r}")
        lst = pairs.setdefault(a, [])
        unacc = spec.get("unacceptable", [])
        if not isinstance(unacc, list):
            raise MalformedDocument('"unacceptable" must be a list')
        for u in unacc:
            if not isinstance(u, str):
                raise MalformedDocument('"unacceptable" entries must be names')
            lst.append((a, idx(u)))
        strict = spec.get("strict", [])
        if not isinstance(strict, list):
            raise MalformedDocument('"strict" must be a list')
        for item in strict:
            b, c = _pair(item, "strict")
            lst.append((idx(b), idx(c)))
    market = HousingMarket.from_pairs(agents, pairs)

    def arcs(key):
        raw = doc.get(key, [])
        if not isinstance(raw, list):
            raise MalformedDocument(f'"{key}" must be a list')
        return frozenset((idx(t), idx(h)) for t, h in (_pair(item, key) for item in raw))

    return Instance(market, arcs("forbidden"), arcs("forced"))


def instance_to_dict(instance: Instance) -> dict:
    m = instance.market
    names = m.names
    prefs = {}
    for a, rel in enumerate(m.prefs):
        strict = [[names[b], names[c]] for b, c in rel.cover_pairs()]
        if strict:
            prefs[names[a]] = {"strict": strict}
    doc = {"agents": list(names), "preferences": prefs}
    if instance.forbidden:
        doc["forbidden"] = [[names[a], names[b]] for a, b in sorted(instance.forbidden)]
    if instance.forced:
        doc["forced"] = [[names[a], names[b]] for a, b in sorted(instance.forced)]
    return doc


def serialize_instance(instance: Instance) -> str:
    """Stable JSON text with one line per agent's preferences."""
    doc = instance_to_dict(instance)
    lines = ["{", f'  "agents": {json.dumps(doc["agents"])},']
    prefs = [f"    {json.dumps(k)}: {json.dumps(v)}" for k, v in doc["preferences"].items()]
    lines.append('  "preferences": {' + ("\n" + ",\n".join(prefs) + "\n  }" if prefs else "}"))
    for key in ("forbidden", "forced"):
        if key in doc:
            lines[-1] += ","
            lines.append(f'  "{key}": {json.dumps(doc[key])}')
    lines.append("}")
    return "\n".join(lines) + "\n"


def parse_allocation(market: HousingMarket, text: str | bytes) -> Allocation:
    """Read an allocation given as ``{"a": "b", ...}`` or ``[["a","b"], ...]``."""
    try:
        doc = json.loads(text)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise MalformedDocument(f"invalid JSON: {exc}") from None
    if isinstance(doc, dict) and "allocation" in doc:
        doc = doc["allocation"]
    if isinstance(doc, dict):
        items = list(doc.items())
    elif isinstance(doc, list):
        items = [_pair(item, "allocation") for item in doc]
    else:
        raise MalformedDocument("allocation must be an object or a list of arcs")
    arcs = []
    for t, h in items:
        if not isinstance(h, str):
            raise MalformedDocument("allocation heads must be names")
        arcs.append((market.index(t), market.index(h)))
    x = Allocation.from_arcs(market.n, arcs)
    market.check_allocation(x)
    return x
