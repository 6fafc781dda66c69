import pytest
from hypothesis import given

from helpers import instances, names
from strongcore.catalog import (
    allocation,
    double_triangle_market,
    empty_core_market,
    hidden_allocation_market,
)
from strongcore.errors import InstanceTooLarge
from strongcore.market import HousingMarket, Instance
from strongcore.oracle import strong_core_set
from strongcore.scfa import (
    enumerate_scfa_outputs,
    forced_to_forbidden,
    solve_scfa,
    solve_scffa,
    tstar_valid_arcs,
)
from strongcore.verify import find_weak_blocking_cycle, peak_sets


def idx(m, agents):
    return [m.index(x) for x in agents]


def test_valid_arcs_in_empty_core_triangle():
    m = empty_core_market()
    s = idx(m, "abc")
    arcs = tstar_valid_arcs(m, s, s)
    assert names(m, arcs) == {("a", "c"), ("c", "a"), ("b", "c"), ("c", "b")}


def test_valid_arcs_unchanged_when_nothing_leaves():
    m = double_triangle_market()
    s = idx(m, "abc")
    everyone = range(m.n)
    assert names(m, tstar_valid_arcs(m, s, everyone)) == {
        ("a", "b"), ("b", "c"), ("c", "a"), ("a", "c"), ("c", "b"), ("b", "a")}


def test_valid_arcs_respect_forbidden():
    m = double_triangle_market()
    s = idx(m, "abc")
    forbidden = {(m.index("a"), m.index("b"))}
    arcs = names(m, tstar_valid_arcs(m, s, range(m.n), forbidden))
    assert ("a", "b") not in arcs and ("a", "c") in arcs


def test_empty_core_market_has_no_solution():
    x, trace = solve_scfa(Instance(empty_core_market()))
    assert x is None
    assert trace.terminal is None
    assert trace.reason


def test_double_triangle_solution():
    m = double_triangle_market()
    x, trace = solve_scfa(Instance(m))
    assert x == allocation(m, ("a", "b"), ("b", "c"), ("c", "a"), ("d1", "d2"), ("d2", "d1"))
    assert trace.terminal == x


def test_hidden_allocation_solution():
    m = hidden_allocation_market()
    x, _ = solve_scfa(Instance(m))
    assert x == allocation(m, ("a", "c"), ("c", "b"), ("b", "a"), ("d1", "d2"), ("d2", "d1"))


def test_single_agent_forbidden_loop():
    m = HousingMarket.from_pairs(["a"], {})
    assert solve_scfa(Instance(m, frozenset({(0, 0)})))[0] is None
    assert solve_scfa(Instance(m))[0].assignment == (0,)


def test_forced_arcs_rejected_by_plain_solver():
    m = double_triangle_market()
    with pytest.raises(ValueError):
        solve_scfa(Instance(m, forced=frozenset({(0, 2)})))


def test_forced_arc_selects_second_triangle():
    m = double_triangle_market()
    x, _ = solve_scffa(Instance(m, forced=frozenset({(m.index("a"), m.index("c"))})))
    assert x == allocation(m, ("a", "c"), ("c", "b"), ("b", "a"), ("d1", "d2"), ("d2", "d1"))


def test_forced_and_forbidden_conflict_is_empty():
    m = double_triangle_market()
    inst = Instance(m, frozenset({(m.index("b"), m.index("c"))}), frozenset({(m.index("a"), m.index("b"))}))
    assert solve_scffa(inst)[0] is None


def test_reduction_adds_nothing_without_forced():
    m = double_triangle_market()
    inst = Instance(m, frozenset({(0, 1)}))
    assert forced_to_forbidden(inst) == inst.forbidden
    assert solve_scffa(inst)[0] == solve_scfa(inst)[0]


def test_output_sets():
    assert enumerate_scfa_outputs(Instance(empty_core_market())) == set()
    m = double_triangle_market()
    assert enumerate_scfa_outputs(Instance(m)) == {
        allocation(m, ("a", "b"), ("b", "c"), ("c", "a"), ("d1", "d2"), ("d2", "d1")),
        allocation(m, ("a", "c"), ("c", "b"), ("b", "a"), ("d1", "d2"), ("d2", "d1")),
    }
    h = hidden_allocation_market()
    assert enumerate_scfa_outputs(Instance(h)) == {
        allocation(h, ("a", "c"), ("c", "b"), ("b", "a"), ("d1", "d2"), ("d2", "d1"))}


def test_enumeration_guard():
    with pytest.raises(InstanceTooLarge):
        enumerate_scfa_outputs(Instance(double_triangle_market()), max_n=4)


def test_trace_serializes():
    m = double_triangle_market()
    _, trace = solve_scfa(Instance(m))
    doc = trace.to_dict(m)
    assert doc["rounds"][0]["components"]
    assert sum(len(r["tstar"]) for r in doc["rounds"]) == m.n


def test_solver_is_deterministic():
    m = hidden_allocation_market()
    one = solve_scfa(Instance(m))
    two = solve_scfa(Instance(m))
    assert one[0] == two[0]
    assert one[1].to_dict(m) == two[1].to_dict(m)


@given(instances(max_n=6))
def test_solver_matches_oracle(inst):
    x, _ = solve_scfa(inst)
    sc = strong_core_set(inst.market, inst.forbidden)
    assert (x is None) == (not sc)
    if x is not None:
        assert x in sc
        assert not find_weak_blocking_cycle(inst.market, x)
        assert not set(x.arcs) & inst.forbidden


@given(instances(max_n=6))
def test_outputs_inside_strong_core(inst):
    assert enumerate_scfa_outputs(inst) <= strong_core_set(inst.market, inst.forbidden)


@given(instances(max_n=6))
def test_peak_sets_of_solutions_survive_first_round(inst):
    m = inst.market
    _, trace = solve_scfa(inst)
    if not trace.rounds:
        return
    first = trace.rounds[0]
    if len(first.agents) != m.n:
        return
    for y in strong_core_set(m, inst.forbidden):
        for p in peak_sets(m, y):
            assert p <= set().union(*first.initial)
            for it in first.iterations:
                assert p <= set(it.tstar)


@given(instances(max_n=6, max_forced=2))
def test_forced_reduction_matches_filtered_oracle(inst):
    x, _ = solve_scffa(inst)
    sc = {y for y in strong_core_set(inst.market, inst.forbidden)
          if all(y[a] == b for a, b in inst.forced)}
    assert (x is None) == (not sc)
    if x is not None:
        assert x in sc
