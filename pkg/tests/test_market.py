import json

import pytest
from hypothesis import given

from helpers import load, markets, names
from strongcore.catalog import double_triangle_market, empty_core_market, hidden_allocation_market
from strongcore.errors import (
    ConflictingRestriction,
    CycleInStrictRelation,
    EmptySubset,
    InvalidAllocation,
    MalformedDocument,
    NonEdgeRestriction,
    UnknownAgent,
)
from strongcore.market import (
    Allocation,
    HousingMarket,
    Instance,
    PreferenceRelation,
    parse_allocation,
    parse_instance,
    restrict,
    serialize_instance,
    underlying_graph,
    undominated_arcs,
)


def doc(**extra):
    base = {"agents": ["a", "b", "c"], "preferences": {}}
    base.update(extra)
    return json.dumps(base)


def non_loops(arcs):
    return {(a, b) for a, b in arcs if a != b}


def test_empty_core_market_parses_with_nine_trading_arcs():
    inst = load("empty_core")
    m = inst.market
    assert m.n == 4
    arcs = underlying_graph(m)
    assert {(a, a) for a in range(4)} <= arcs
    assert len(non_loops(arcs)) == 9


def test_double_triangle_arc_count_matches_acceptability_lists():
    # a: b,c,d1   b: a,c,d2   c: a,b   d1: c,d2   d2: d1
    m = load("double_triangle").market
    assert len(non_loops(underlying_graph(m))) == 3 + 3 + 2 + 2 + 1


def test_hidden_allocation_arcs():
    m = hidden_allocation_market()
    expected = {("a", "b"), ("a", "c"), ("a", "d1"), ("b", "a"), ("b", "c"), ("b", "d1"),
                ("c", "a"), ("c", "b"), ("c", "d1"), ("d1", "d2"), ("d2", "d1")}
    assert names(m, non_loops(underlying_graph(m))) == expected


def test_symmetric_strict_pairs_rejected():
    text = doc(preferences={"a": {"strict": [["b", "c"], ["c", "b"]]}})
    with pytest.raises(CycleInStrictRelation):
        parse_instance(text)


def test_longer_cycle_rejected():
    text = doc(preferences={"a": {"strict": [["a", "b"], ["b", "c"], ["c", "a"]]}})
    with pytest.raises(CycleInStrictRelation):
        parse_instance(text)


@pytest.mark.parametrize("text, error", [
    ("{not json", MalformedDocument),
    ('["a"]', MalformedDocument),
    ('{"agents": []}', MalformedDocument),
    ('{"agents": ["a", "a"]}', MalformedDocument),
    (doc(preferences={"z": {}}), UnknownAgent),
    (doc(preferences={"a": {"strict": [["b", "q"]]}}), UnknownAgent),
    (doc(preferences={"a": {"strict": [["b"]]}}), MalformedDocument),
    (doc(preferences={"a": {"rank": []}}), MalformedDocument),
    (doc(preferences={"a": {"unacceptable": ["b"]}}, forbidden=[["a", "b"]]), NonEdgeRestriction),
    (doc(forbidden=[["a", "b"]], forced=[["a", "b"]]), ConflictingRestriction),
    (doc(forced=[["a", "b"], ["a", "c"]]), ConflictingRestriction),
])
def test_parse_errors(text, error):
    with pytest.raises(error):
        parse_instance(text)


def test_unacceptable_list_equals_own_house_above():
    one = parse_instance(doc(preferences={"a": {"unacceptable": ["b"]}}))
    two = parse_instance(doc(preferences={"a": {"strict": [["a", "b"]]}}))
    assert one.market == two.market
    assert one.market.acceptable(0) == [0, 2]


def test_single_agent_graph_is_a_loop():
    m = HousingMarket.from_pairs(["a"], {})
    assert underlying_graph(m) == {(0, 0)}
    assert undominated_arcs(m) == {(0, 0)}


def test_empty_core_undominated_arcs():
    m = empty_core_market()
    expected = {("a", "b"), ("a", "c"), ("b", "c"), ("b", "a"), ("c", "a"), ("c", "b"), ("d", "c")}
    assert names(m, undominated_arcs(m)) == expected


def test_no_strict_pairs_makes_every_arc_undominated():
    m = parse_instance(doc()).market
    assert undominated_arcs(m) == underlying_graph(m)
    assert len(underlying_graph(m)) == 9


def test_hidden_allocation_undominated_arcs():
    m = hidden_allocation_market()
    top = {x for x in names(m, undominated_arcs(m)) if x[0] in "abc"}
    assert top == {("a", "c"), ("b", "a"), ("c", "b"), ("a", "d1"), ("b", "d1"), ("c", "d1")}


def test_restrict_to_single_agent():
    m = empty_core_market()
    sub = restrict(m, [m.index("d")])
    assert sub.names == ("d",)
    assert underlying_graph(sub) == {(0, 0)}


def test_restrict_to_everyone_is_identity():
    m = empty_core_market()
    assert restrict(m, range(m.n)) == m


def test_restricted_triangle_has_double_three_cycle():
    m = double_triangle_market()
    sub = restrict(m, [m.index(x) for x in "abc"])
    assert names(sub, undominated_arcs(sub)) == {
        ("a", "b"), ("b", "c"), ("c", "a"), ("a", "c"), ("c", "b"), ("b", "a")}


def test_restrict_empty():
    with pytest.raises(EmptySubset):
        restrict(empty_core_market(), [])


def test_allocation_must_be_permutation():
    with pytest.raises(InvalidAllocation):
        Allocation((0, 0, 1))


def test_allocation_must_respect_acceptability():
    m = empty_core_market()
    with pytest.raises(InvalidAllocation):
        parse_allocation(m, '{"a": "a", "b": "b", "c": "d", "d": "c"}')


def test_parse_allocation_forms():
    m = empty_core_market()
    x = parse_allocation(m, '{"allocation": {"a": "b", "b": "c", "c": "a", "d": "d"}}')
    y = parse_allocation(m, '[["a", "b"], ["b", "c"], ["c", "a"], ["d", "d"]]')
    assert x == y == Allocation((1, 2, 0, 3))


def test_instance_rejects_out_of_range_arc():
    with pytest.raises(UnknownAgent):
        Instance(empty_core_market(), frozenset({(0, 9)}))


def test_partial_order_queries():
    rel = PreferenceRelation.from_pairs(0, 3, [(1, 0), (0, 2)])
    assert rel.prefers(1, 2)
    assert rel.weakly_prefers(1, 1)
    assert rel.indifferent(1, 1)
    assert not rel.weakly_prefers(2, 1)


@given(markets())
def test_market_invariants(m):
    arcs = underlying_graph(m)
    und = undominated_arcs(m)
    assert und <= arcs
    for a in range(m.n):
        assert (a, a) in arcs
        assert any(t == a for t, _ in und)
        if m.prefs[a].order_class() == "strict":
            assert sum(1 for t, _ in und if t == a) == 1


@given(markets())
def test_closure_is_idempotent(m):
    for rel in m.prefs:
        assert rel.is_closed()
        assert PreferenceRelation.from_masks(rel.owner, rel.below) == rel
        assert PreferenceRelation.from_pairs(rel.owner, rel.n, rel.cover_pairs()) == rel


@given(markets())
def test_serialization_round_trip(m):
    inst = Instance(m, frozenset(m.arcs[:1]) if m.n > 1 else frozenset())
    again = parse_instance(serialize_instance(inst))
    assert again == inst
