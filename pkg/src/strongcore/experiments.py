"""Random market generators, preference classifiers and property harnesses."""
from __future__ import annotations

import math
import random
import statistics
import time
from dataclasses import asdict, dataclass, field
from typing import Iterable, Mapping, Sequence

from .errors import CycleInStrictRelation, NotAnImprovement
from .market import Allocation, Arc, HousingMarket, Instance, PreferenceRelation, iter_bits, mask_of
from .oracle import strong_core_set
from .scfa import enumerate_scfa_outputs, solve_scfa

KINDS = ("strict", "weak", "partial-dag", "semiorder", "two-criteria")
SEMIORDER_THRESHOLD = 1.0


@dataclass(frozen=True)
class GeneratorSpec:
    kind: str
    n: int
    density: float = 0.6
    seed: int = 0
    edge_prob: float = 0.35
    span: float = 3.0
    grid: int = 4

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown generator kind {self.kind!r}")
        if self.n < 1:
            raise ValueError("need at least one agent")


def agent_names(n: int) -> list[str]:
    width = len(str(n - 1))
    return [f"a{i:0{width}d}" for i in range(n)]


def _chain_masks(n: int, layers: Sequence[Sequence[int]]) -> list[int]:
    """Direct below-masks putting every member of a layer above the next layer."""
    masks = [0] * n
    for upper, lower in zip(layers, layers[1:]):
        m = mask_of(lower)
        for b in upper:
            masks[b] |= m
    return masks


def _ordered_partition(rng: random.Random, items: list[int]) -> list[list[int]]:
    rng.shuffle(items)
    layers: list[list[int]] = []
    for b in items:
        if not layers or rng.random() < 0.5:
            layers.append([b])
        else:
            layers[-1].append(b)
    return layers


def semiorder_relation(owner: int, utilities: Sequence[float],
                       threshold: float = SEMIORDER_THRESHOLD) -> PreferenceRelation:
    """b above c exactly when u(b) exceeds u(c) by more than the threshold."""
    n = len(utilities)
    masks = [mask_of(c for c in range(n) if utilities[b] > utilities[c] + threshold) for b in range(n)]
    return PreferenceRelation.from_masks(owner, masks)


def two_criteria_relation(owner: int, scores: Sequence[tuple[int, int]]) -> PreferenceRelation:
    """Componentwise dominance: at least as good on both scores and better on one."""
    n = len(scores)

    def beats(s, t):
        return s[0] >= t[0] and s[1] >= t[1] and s != t

    masks = [mask_of(c for c in range(n) if beats(scores[b], scores[c])) for b in range(n)]
    return PreferenceRelation.from_masks(owner, masks)


def random_relation(rng: random.Random, owner: int, n: int, kind: str, density: float,
                    edge_prob: float = 0.35, span: float = 3.0, grid: int = 4) -> PreferenceRelation:
    others = [b for b in range(n) if b != owner]
    acc = [b for b in others if rng.random() < density]
    unacc = [b for b in others if b not in acc]
    if kind == "strict":
        rng.shuffle(acc)
        rng.shuffle(unacc)
        order = acc + [owner] + unacc
        return PreferenceRelation.from_masks(owner, _chain_masks(n, [[b] for b in order]))
    if kind == "weak":
        layers = _ordered_partition(rng, acc)
        if layers and rng.random() < 0.5:
            layers[-1].append(owner)
        else:
            layers.append([owner])
        layers += _ordered_partition(rng, unacc)
        return PreferenceRelation.from_masks(owner, _chain_masks(n, layers))
    if kind == "partial-dag":
        rng.shuffle(acc)
        order = acc + [owner]
        masks = [0] * n
        for i, b in enumerate(order):
            for c in order[i + 1:]:
                if c == owner or rng.random() < edge_prob:
                    masks[b] |= 1 << c
        # unacceptable houses stay mutually incomparable; their order never matters
        masks[owner] |= mask_of(unacc)
        return PreferenceRelation.from_masks(owner, masks)
    # utility-shaped kinds score the owner's house too, so acceptability follows from the scores
    if kind == "semiorder":
        return semiorder_relation(owner, [rng.uniform(0.0, span) for _ in range(n)])
    if kind == "two-criteria":
        return two_criteria_relation(owner, [(rng.randrange(grid), rng.randrange(grid)) for _ in range(n)])
    raise ValueError(f"unknown generator kind {kind!r}")


def generate(spec: GeneratorSpec) -> HousingMarket:
    rng = random.Random(spec.seed)
    prefs = tuple(random_relation(rng, a, spec.n, spec.kind, spec.density,
                                  spec.edge_prob, spec.span, spec.grid) for a in range(spec.n))
    return HousingMarket(tuple(agent_names(spec.n)), prefs)


def classify_preferences(market: HousingMarket) -> list[str]:
    return [rel.order_class() for rel in market.prefs]


def random_arc_subset(rng: random.Random, market: HousingMarket, density: float) -> frozenset[Arc]:
    return frozenset(arc for arc in market.arcs if rng.random() < density)


def random_instance(seed: int, max_n: int = 7, kinds: Sequence[str] = KINDS,
                    max_forbid: float = 0.3, max_forced: int = 0, min_n: int = 1) -> Instance:
    """One reproducible trial instance with a random generator kind and forbidden set."""
    rng = random.Random(seed)
    n = rng.randint(min_n, max_n)
    spec = GeneratorSpec(rng.choice(list(kinds)), n, density=rng.uniform(0.3, 0.9),
                         seed=rng.getrandbits(64))
    market = generate(spec)
    forbidden = random_arc_subset(rng, market, rng.uniform(0.0, max_forbid))
    forced: list[Arc] = []
    if max_forced:
        tails: set[int] = set()
        for _ in range(rng.randint(0, max_forced)):
            candidates = [arc for arc in market.arcs if arc not in forbidden and arc[0] not in tails]
            if not candidates:
                break
            arc = rng.choice(candidates)
            forced.append(arc)
            tails.add(arc[0])
    return Instance(market, forbidden, tuple(forced))


# improvements

@dataclass(frozen=True)
class ImprovementStep:
    """Edit agent q's relation and re-close it.

    Edits act on the generating pairs (the transitive reduction): ``remove`` and
    the reverse of every added pair are dropped, then ``add`` is inserted.
    """

    p: int
    q: int
    add: frozenset[Arc] = frozenset()
    remove: frozenset[Arc] = frozenset()

    def to_dict(self, market: HousingMarket) -> dict:
        names = market.names
        return {
            "p": names[self.p],
            "q": names[self.q],
            "add": sorted([names[b], names[c]] for b, c in self.add),
            "remove": sorted([names[b], names[c]] for b, c in self.remove),
        }


def violated_improvement_condition(before: HousingMarket, after: HousingMarket, p: int, q: int) -> int:
    """0 if ``after`` is a (p, q)-improvement of ``before``, else the first broken condition."""
    n = before.n
    for a in range(n):
        if a != q and before.prefs[a].below != after.prefs[a].below:
            return 1
    old, new = before.prefs[q], after.prefs[q]
    for a in range(n):
        if a == p:
            continue
        if old.prefers(p, a) and not new.prefers(p, a):
            return 2
        if old.weakly_prefers(p, a) and not new.weakly_prefers(p, a):
            return 2
    keep = ~(1 << p)
    for b in range(n):
        if b != p and (old.below[b] & keep) != (new.below[b] & keep):
            return 3
    return 0


_CONDITION_TEXT = {
    1: "only the relation of q may change",
    2: "p may only rise in q's relation",
    3: "comparisons not involving p must stay the same",
}


def _edited_market(market: HousingMarket, step: ImprovementStep) -> HousingMarket:
    if not (0 <= step.p < market.n and 0 <= step.q < market.n):
        raise NotAnImprovement(1, "improvement step names an unknown agent")
    # adding (b, c) implicitly drops (c, b)
    flipped = frozenset((c, b) for b, c in step.add)
    pairs = (frozenset(market.prefs[step.q].cover_pairs()) - step.remove - flipped) | step.add
    try:
        rel = PreferenceRelation.from_pairs(step.q, market.n, pairs)
    except CycleInStrictRelation as exc:
        raise NotAnImprovement(2, f"edited relation is not a partial order: {exc}") from exc
    prefs = list(market.prefs)
    prefs[step.q] = rel
    return HousingMarket(market.names, tuple(prefs))


def apply_improvement(market: HousingMarket, steps: Iterable[ImprovementStep]) -> HousingMarket:
    for step in steps:
        after = _edited_market(market, step)
        bad = violated_improvement_condition(market, after, step.p, step.q)
        if bad:
            raise NotAnImprovement(bad, _CONDITION_TEXT[bad])
        market = after
    return market


def random_improvement_step(rng: random.Random, market: HousingMarket, p: int,
                            attempts: int = 40) -> ImprovementStep | None:
    """Propose random lifts of p at a random q until one validates."""
    n = market.n
    for _ in range(attempts):
        q = rng.randrange(n)
        rel = market.prefs[q]
        remove = frozenset((a, p) for a in range(n) if rel.prefers(a, p) and rng.random() < 0.5)
        add = frozenset((p, a) for a in range(n)
                        if a != p and not rel.prefers(p, a) and not rel.prefers(a, p) and rng.random() < 0.3)
        add |= frozenset((p, a) for a, _ in remove if rng.random() < 0.3)
        if not remove and not add:
            continue
        step = ImprovementStep(p, q, add, remove)
        try:
            apply_improvement(market, [step])
        except NotAnImprovement:
            continue
        return step
    return None


def random_improvement(rng: random.Random, market: HousingMarket, p: int,
                       max_steps: int = 3) -> list[ImprovementStep]:
    steps = []
    current = market
    for _ in range(rng.randint(1, max_steps)):
        step = random_improvement_step(rng, current, p)
        if step is None:
            break
        steps.append(step)
        current = apply_improvement(current, [step])
    return steps


def _allocation_json(market: HousingMarket, x: Allocation) -> dict[str, str]:
    return x.to_names(market)


@dataclass
class RiReport:
    p: str
    before: list[dict] = field(default_factory=list)
    after: list[dict] = field(default_factory=list)
    violations: list[dict] = field(default_factory=list)
    became_empty: bool = False
    p_improved: bool = False

    @property
    def passed(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        out = asdict(self)
        out["passed"] = self.passed
        return out


def ri_harness(market: HousingMarket, p: int, steps: Sequence[ImprovementStep],
               max_n: int | None = None) -> RiReport:
    """Compare p's outcome over the full strong cores before and after a p-improvement."""
    for step in steps:
        if step.p != p:
            raise NotAnImprovement(1, "every step of a p-improvement must lift the same agent")
    improved = apply_improvement(market, steps)
    before = sorted(strong_core_set(market, max_n=max_n), key=lambda x: x.assignment)
    after = sorted(strong_core_set(improved, max_n=max_n), key=lambda x: x.assignment)
    report = RiReport(market.names[p],
                      [_allocation_json(market, x) for x in before],
                      [_allocation_json(market, x) for x in after])
    report.became_empty = bool(before) and not after
    rel = improved.prefs[p]
    for x in before:
        for y in after:
            if not rel.weakly_prefers(y[p], x[p]):
                report.violations.append({"before": _allocation_json(market, x),
                                          "after": _allocation_json(market, y)})
            elif rel.prefers(y[p], x[p]):
                report.p_improved = True
    return report


def ri_trials(trials: int, seed: int, max_n: int = 6) -> dict:
    """Seeded random (market, p-improvement) pairs; each trial replays from its own seed."""
    master = random.Random(seed)
    rows = []
    counts = {"trials": 0, "violations": 0, "became_empty": 0, "p_improved": 0, "no_step": 0}
    for _ in range(trials):
        trial_seed = master.getrandbits(64)
        rng = random.Random(trial_seed)
        instance = random_instance(rng.getrandbits(64), max_n=max_n, max_forbid=0.0, min_n=2)
        market = instance.market
        p = rng.randrange(market.n)
        steps = random_improvement(rng, market, p)
        counts["trials"] += 1
        if not steps:
            counts["no_step"] += 1
        report = ri_harness(market, p, steps)
        counts["violations"] += len(report.violations)
        counts["became_empty"] += report.became_empty
        counts["p_improved"] += report.p_improved
        rows.append({"seed": trial_seed, "n": market.n, "p": report.p, "steps": len(steps),
                     "sc_before": len(report.before), "sc_after": len(report.after),
                     "violations": len(report.violations)})
    return {"experiment": "ri", "seed": seed, "summary": counts, "trials": rows}


# group strategyproofness

@dataclass
class GspReport:
    coalition: list[str]
    outputs_before: int
    outputs_after: int
    counterexamples: list[dict] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.counterexamples

    def to_dict(self) -> dict:
        out = asdict(self)
        out["passed"] = self.passed
        return out


def deviate(instance: Instance, reports: Mapping[int, PreferenceRelation]) -> Instance:
    """Replace the relations of the coalition; forbidden arcs leaving the new digraph are dropped."""
    market = instance.market
    prefs = list(market.prefs)
    for a, rel in reports.items():
        if rel.owner != a:
            rel = PreferenceRelation(a, rel.below)
        prefs[a] = rel
    lied = HousingMarket(market.names, tuple(prefs))
    forbidden = frozenset(arc for arc in instance.forbidden if lied.has_arc(*arc))
    return Instance(lied, forbidden)


def gsp_check(instance: Instance, coalition: Iterable[int], lied: Instance,
              max_n: int | None = None, truthful: set[Allocation] | None = None) -> GspReport:
    """Look for X from truthful reports and X' from the lie with every coalition member strictly better in X'."""
    market = instance.market
    coalition = sorted(set(coalition))
    if truthful is None:
        truthful = enumerate_scfa_outputs(instance, max_n)
    lying = enumerate_scfa_outputs(lied, max_n)
    report = GspReport([market.names[c] for c in coalition], len(truthful), len(lying))
    if not coalition:
        return report
    for x in sorted(truthful, key=lambda z: z.assignment):
        for y in sorted(lying, key=lambda z: z.assignment):
            if all(market.prefers(c, y[c], x[c]) for c in coalition):
                report.counterexamples.append({"truthful": x.to_names(market), "lie": y.to_names(market)})
    return report


def gsp_harness(instance: Instance, trials: int, seed: int, max_coalition: int = 2,
                max_n: int | None = None) -> list[dict]:
    """Random coalition deviations against one instance."""
    market = instance.market
    truthful = enumerate_scfa_outputs(instance, max_n)
    master = random.Random(seed)
    rows = []
    for _ in range(trials):
        trial_seed = master.getrandbits(64)
        rng = random.Random(trial_seed)
        size = rng.randint(1, min(max_coalition, market.n))
        coalition = sorted(rng.sample(range(market.n), size))
        lies = {c: random_relation(rng, c, market.n, rng.choice(KINDS), rng.uniform(0.2, 1.0))
                for c in coalition}
        report = gsp_check(instance, coalition, deviate(instance, lies), max_n, truthful)
        rows.append({"seed": trial_seed, "coalition": report.coalition,
                     "outputs_before": report.outputs_before, "outputs_after": report.outputs_after,
                     "counterexamples": report.counterexamples})
    return rows


def gsp_trials(trials: int, seed: int, max_n: int = 6, per_instance: int = 10) -> dict:
    master = random.Random(seed)
    rows = []
    done = 0
    found = 0
    while done < trials:
        instance_seed = master.getrandbits(64)
        instance = random_instance(instance_seed, max_n=max_n, min_n=2)
        batch = min(per_instance, trials - done)
        for row in gsp_harness(instance, batch, master.getrandbits(64)):
            row["instance_seed"] = instance_seed
            found += len(row["counterexamples"])
            rows.append(row)
        done += batch
    return {"experiment": "gsp", "seed": seed,
            "summary": {"deviations": done, "counterexamples": found}, "trials": rows}


# scaling

def sparse_market(n: int, seed: int, degree: float = 4.0, kind: str = "partial-dag") -> HousingMarket:
    return generate(GeneratorSpec(kind, n, density=min(1.0, degree / max(n - 1, 1)), seed=seed))


def loglog_slope(sizes: Sequence[float], times: Sequence[float]) -> float:
    xs = [math.log(s) for s in sizes]
    ys = [math.log(max(t, 1e-9)) for t in times]
    return statistics.linear_regression(xs, ys).slope


def scaling_experiment(sizes: Sequence[int] = (100, 200, 400, 800), reps: int = 3,
                       seed: int = 0, degree: float = 4.0, kind: str = "partial-dag") -> dict:
    """Median wall time of the solver on random sparse markets of one generator kind."""
    master = random.Random(seed)
    rows = []
    for n in sizes:
        times = []
        empty = 0
        rounds = []
        for _ in range(reps):
            market = sparse_market(n, master.getrandbits(64), degree, kind)
            start = time.perf_counter()
            x, trace = solve_scfa(Instance(market))
            times.append(time.perf_counter() - start)
            empty += x is None
            rounds.append(len(trace.rounds))
        rows.append({"n": n, "median_seconds": statistics.median(times),
                     "times": times, "empty": empty, "rounds": rounds})
    slope = loglog_slope([r["n"] for r in rows], [r["median_seconds"] for r in rows])
    return {"experiment": "scaling", "kind": kind, "seed": seed, "degree": degree, "reps": reps,
            "rows": rows, "loglog_slope": slope}
