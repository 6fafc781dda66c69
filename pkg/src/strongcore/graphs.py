"""Digraph routines: strongly connected components, absorbing sets,
allocation-as-perfect-matching, and cycle reconstruction.

Vertices are dense integers.  Every routine visits vertices and neighbours in
increasing index order, so results are reproducible.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

Arc = tuple[int, int]


@dataclass(frozen=True)
class Digraph:
    vertex_count: int
    adj: tuple[tuple[int, ...], ...]

    @classmethod
    def from_arcs(cls, n: int, arcs: Iterable[Arc]) -> "Digraph":
        out: list[set[int]] = [set() for _ in range(n)]
        for u, v in arcs:
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"arc ({u}, {v}) out of range for {n} vertices")
            out[u].add(v)
        return cls(n, tuple(tuple(sorted(s)) for s in out))

    @classmethod
    def from_masks(cls, masks: list[int]) -> "Digraph":
        from .market import iter_bits
        return cls(len(masks), tuple(tuple(iter_bits(m)) for m in masks))

    @property
    def arcs(self) -> list[Arc]:
        return [(u, v) for u in range(self.vertex_count) for v in self.adj[u]]

    def has_arc(self, u: int, v: int) -> bool:
        return v in self.adj[u]


@dataclass(frozen=True)
class SccDecomposition:
    """Components indexed in topological order: arcs never go to a lower index."""

    component_of: tuple[int, ...]
    components: tuple[tuple[int, ...], ...]
    condensation: Digraph


def scc(g: Digraph, vertices: Iterable[int] | None = None) -> SccDecomposition:
    """Tarjan's algorithm, iterative.

    With ``vertices`` given, only the induced subgraph on them is decomposed;
    other vertices get component index -1.
    """
    n = g.vertex_count
    if vertices is None:
        order = range(n)
        inside = None
    else:
        order = sorted(set(vertices))
        inside = set(order)
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    found: list[list[int]] = []
    counter = 0
    for root in order:
        if index[root] != -1:
            continue
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        work = [(root, 0)]
        while work:
            v, i = work[-1]
            nbrs = g.adj[v]
            if i < len(nbrs):
                work[-1] = (v, i + 1)
                w = nbrs[i]
                if inside is not None and w not in inside:
                    continue
                if index[w] == -1:
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, 0))
                elif on_stack[w] and index[w] < low[v]:
                    low[v] = index[w]
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                if low[v] < low[parent]:
                    low[parent] = low[v]
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                found.append(sorted(comp))
    # Tarjan emits sinks first; reverse for a topological numbering.
    found.reverse()
    component_of = [-1] * n
    for ci, comp in enumerate(found):
        for v in comp:
            component_of[v] = ci
    cond: list[set[int]] = [set() for _ in found]
    for ci, comp in enumerate(found):
        for v in comp:
            for w in g.adj[v]:
                cw = component_of[w]
                if cw != -1 and cw != ci:
                    cond[ci].add(cw)
    condensation = Digraph(len(found), tuple(tuple(sorted(s)) for s in cond))
    return SccDecomposition(tuple(component_of), tuple(tuple(c) for c in found), condensation)


def absorbing_sets(g: Digraph, vertices: Iterable[int] | None = None) -> list[frozenset[int]]:
    """Strongly connected components left by no arc, ordered by smallest member."""
    dec = scc(g, vertices)
    sinks = [frozenset(comp) for ci, comp in enumerate(dec.components) if not dec.condensation.adj[ci]]
    return sorted(sinks, key=min)


def _adjacency(agents: list[int], allowed: Iterable[Arc] | Mapping[int, Iterable[int]]) -> dict[int, list[int]]:
    members = set(agents)
    adj: dict[int, set[int]] = {a: set() for a in agents}
    items = allowed.items() if isinstance(allowed, Mapping) else None
    if items is not None:
        for a, heads in items:
            if a in members:
                adj[a].update(h for h in heads if h in members)
    else:
        for a, b in allowed:
            if a in members and b in members:
                adj[a].add(b)
    return {a: sorted(hs) for a, hs in adj.items()}


def _any_perfect_matching(agents: list[int], adj: dict[int, list[int]]) -> dict[int, int] | None:
    owner: dict[int, int] = {}
    head: dict[int, int] = {}
    for root in agents:
        if not adj[root]:
            return None
        # augmenting path search from root, iterative DFS
        visited: set[int] = set()
        parent: dict[int, int] = {}  # head -> tail that reached it
        stack = [(root, 0)]
        end = None
        while stack and end is None:
            t, i = stack[-1]
            nbrs = adj[t]
            if i >= len(nbrs):
                stack.pop()
                continue
            stack[-1] = (t, i + 1)
            h = nbrs[i]
            if h in visited:
                continue
            visited.add(h)
            parent[h] = t
            if h not in owner:
                end = h
            else:
                stack.append((owner[h], 0))
        if end is None:
            return None
        h = end
        while True:
            t = parent[h]
            prev = head.get(t)
            head[t] = h
            owner[h] = t
            if t == root:
                break
            h = prev
    return head


def perfect_matching_allocation(agents: Iterable[int], allowed) -> dict[int, int] | None:
    """Allocation on ``agents`` using only ``allowed`` arcs, or None.

    ``allowed`` is an iterable of arcs or a mapping tail -> heads.  Among all
    such allocations the lexicographically least (tails in increasing order,
    compared by head) is returned.
    """
    agents = sorted(set(agents))
    adj = _adjacency(agents, allowed)
    match = _any_perfect_matching(agents, adj)
    if match is None:
        return None
    incoming: dict[int, list[int]] = {a: [] for a in agents}
    for t in agents:
        for h in adj[t]:
            incoming[h].append(t)
    owner = {h: t for t, h in match.items()}
    fixed: set[int] = set()
    for a in agents:
        current = match[a]
        if adj[a][0] == current:
            fixed.add(a)
            continue
        # Tails that can hand their head down a chain ending at a.
        nxt = {a: a}
        queue = deque([a])
        while queue:
            t2 = queue.popleft()
            for t in incoming[match[t2]]:
                if t not in fixed and t not in nxt:
                    nxt[t] = t2
                    queue.append(t)
        for b in adj[a]:
            if b >= current:
                break
            t1 = owner[b]
            if t1 in fixed or t1 not in nxt or t1 == a:
                continue
            new_heads = {a: b}
            t = t1
            while t != a:
                new_heads[t] = match[nxt[t]]
                t = nxt[t]
            for t, h in new_heads.items():
                match[t] = h
                owner[h] = t
            break
        fixed.add(a)
    return match


def all_perfect_matchings(agents: Iterable[int], allowed) -> Iterator[dict[int, int]]:
    """Every allocation on ``agents`` within ``allowed``, in lexicographic order."""
    agents = sorted(set(agents))
    adj = _adjacency(agents, allowed)
    used: set[int] = set()
    chosen: dict[int, int] = {}

    def rec(i):
        if i == len(agents):
            yield dict(chosen)
            return
        a = agents[i]
        for b in adj[a]:
            if b not in used:
                used.add(b)
                chosen[a] = b
                yield from rec(i + 1)
                used.discard(b)
                del chosen[a]

    yield from rec(0)


def cycle_through(g: Digraph, arc: Arc, vertices: Iterable[int] | None = None) -> list[Arc] | None:
    """A simple cycle containing ``arc``, closed by a shortest path back, or None."""
    u, v = arc
    if u == v:
        return [(u, u)]
    inside = None if vertices is None else set(vertices)
    parent = {v: v}
    queue = deque([v])
    while queue:
        x = queue.popleft()
        if x == u:
            break
        for y in g.adj[x]:
            if y not in parent and (inside is None or y in inside):
                parent[y] = x
                queue.append(y)
    if u not in parent:
        return None
    path = []
    x = u
    while x != v:
        path.append((parent[x], x))
        x = parent[x]
    path.reverse()
    return [(u, v)] + path
