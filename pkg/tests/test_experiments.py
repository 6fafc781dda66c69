import json
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from helpers import markets
from strongcore.catalog import (
    empty_core_market,
    improvement_base_market,
    improvement_emptied_market,
    improvement_kept_market,
)
from strongcore.errors import NotAnImprovement
from strongcore.experiments import (
    KINDS,
    GeneratorSpec,
    ImprovementStep,
    apply_improvement,
    classify_preferences,
    deviate,
    generate,
    gsp_check,
    gsp_harness,
    gsp_trials,
    loglog_slope,
    random_improvement,
    ri_harness,
    ri_trials,
    scaling_experiment,
    semiorder_relation,
    two_criteria_relation,
    violated_improvement_condition,
)
from strongcore.market import Instance, PreferenceRelation


def lift(m, p, q, *pairs):
    return ImprovementStep(m.index(p), m.index(q), frozenset((m.index(b), m.index(c)) for b, c in pairs))


def test_two_criteria_dominance():
    rel = two_criteria_relation(0, [(1, 1), (2, 2)])
    assert rel.prefers(1, 0)


def test_two_criteria_tradeoff_is_incomparable():
    rel = two_criteria_relation(0, [(1, 2), (2, 1)])
    assert rel.indifferent(0, 1)


def test_semiorder_threshold():
    rel = semiorder_relation(0, [0.0, 0.6, 1.2])
    a, b, c = 0, 1, 2
    assert rel.indifferent(a, b)
    assert rel.indifferent(b, c)
    assert rel.prefers(c, a)
    assert rel.order_class() == "partial"


def test_classifier_examples():
    # s above q, r level with both
    s, r, q = 0, 1, 2
    assert PreferenceRelation.from_pairs(0, 3, [(s, q)]).order_class() == "partial"
    assert PreferenceRelation.from_pairs(0, 3, []).order_class() == "weak"
    assert PreferenceRelation.from_pairs(0, 3, [(0, 1), (1, 2)]).order_class() == "strict"
    assert classify_preferences(empty_core_market())[0] == "partial"


def test_unknown_kind():
    with pytest.raises(ValueError):
        GeneratorSpec("uniform", 3)


@pytest.mark.parametrize("kind", KINDS)
def test_generation_is_reproducible(kind):
    spec = GeneratorSpec(kind, 7, seed=99)
    assert generate(spec) == generate(spec)


@pytest.mark.parametrize("kind, allowed", [("strict", {"strict"}), ("weak", {"strict", "weak"})])
def test_strict_and_weak_generators_classify_exactly(kind, allowed):
    # a weak generator may happen to draw singleton layers, which is a total order
    seen = set()
    for seed in range(50):
        classes = set(classify_preferences(generate(GeneratorSpec(kind, 6, seed=seed))))
        assert classes <= allowed
        seen |= classes
    assert kind in seen


@given(markets(max_n=7))
def test_generated_relations_are_partial_orders(m):
    for rel in m.prefs:
        assert rel.is_closed()
        assert classify_preferences(m)


def test_lift_at_b_gives_kept_market():
    m = improvement_base_market()
    assert apply_improvement(m, [lift(m, "c", "b", ("c", "b"))]) == improvement_kept_market()


def test_lift_at_a_gives_emptied_market():
    m = improvement_base_market()
    assert apply_improvement(m, [lift(m, "c", "a", ("c", "a"))]) == improvement_emptied_market()


def test_demotion_rejected():
    m = improvement_base_market()
    with pytest.raises(NotAnImprovement) as err:
        apply_improvement(m, [lift(m, "c", "a", ("d", "c"))])
    assert err.value.condition == 2


def test_changing_other_comparisons_rejected():
    m = improvement_base_market()
    with pytest.raises(NotAnImprovement) as err:
        apply_improvement(m, [lift(m, "c", "a", ("a", "b"))])
    assert err.value.condition == 3


def test_condition_one_detected():
    m = improvement_base_market()
    other = improvement_kept_market()
    assert violated_improvement_condition(m, other, m.index("c"), m.index("a")) == 1


def test_empty_improvement_is_identity():
    m = improvement_base_market()
    assert apply_improvement(m, []) == m


def test_ri_kept():
    m = improvement_base_market()
    report = ri_harness(m, m.index("c"), [lift(m, "c", "b", ("c", "b"))])
    assert report.passed and report.p_improved and not report.became_empty
    assert report.after == [{"a": "b", "b": "c", "c": "a", "d": "d"}]


def test_ri_emptied():
    m = improvement_base_market()
    report = ri_harness(m, m.index("c"), [lift(m, "c", "a", ("c", "a"))])
    assert report.passed and report.became_empty and report.after == []


def test_ri_identity():
    m = improvement_base_market()
    report = ri_harness(m, m.index("c"), [])
    assert report.passed and report.before == report.after


def test_ri_rejects_mixed_agents():
    m = improvement_base_market()
    with pytest.raises(NotAnImprovement):
        ri_harness(m, m.index("c"), [lift(m, "d", "a", ("d", "a"))])


@given(markets(max_n=6), st.integers(0, 2**32))
def test_random_improvements_validate(m, seed):
    rng = random.Random(seed)
    p = rng.randrange(m.n)
    steps = random_improvement(rng, m, p)
    improved = apply_improvement(m, steps)
    assert all(s.p == p for s in steps)
    assert ri_harness(m, p, steps).passed
    assert improved.n == m.n


def test_gsp_empty_coalition():
    inst = Instance(improvement_base_market())
    assert gsp_check(inst, [], inst).passed


def test_gsp_truthful_deviation():
    m = improvement_base_market()
    inst = Instance(m)
    same = deviate(inst, {0: m.prefs[0]})
    report = gsp_check(inst, [0], same)
    assert report.passed and report.outputs_before == report.outputs_after


def test_gsp_harness_rows_replay():
    m = improvement_kept_market()
    rows = gsp_harness(Instance(m), 25, seed=5)
    assert rows == gsp_harness(Instance(m), 25, seed=5)
    assert not any(r["counterexamples"] for r in rows)


def test_trial_reports_are_json_and_deterministic():
    one = ri_trials(20, seed=3)
    assert json.dumps(one) == json.dumps(ri_trials(20, seed=3))
    two = gsp_trials(30, seed=3)
    assert json.dumps(two) == json.dumps(gsp_trials(30, seed=3))
    assert two["summary"]["deviations"] == 30


def test_loglog_slope():
    assert loglog_slope([1, 2, 4], [1, 8, 64]) == pytest.approx(3.0)


def test_small_scaling_run():
    report = scaling_experiment(sizes=(20, 40), reps=1, seed=1)
    assert [r["n"] for r in report["rows"]] == [20, 40]
    assert json.dumps(report)
