"""Integer program whose feasible points are the strong-core allocations with prices.

Variables are ``y_i_j`` (agent i receives j's house) for every arc and an
integer price ``p_i`` in ``1..n`` per agent.  Rows are written in CPLEX LP
format so any external solver can read them.
"""
from __future__ import annotations

import os
import re
from dataclasses import dataclass, field
from typing import Mapping, TextIO

from .errors import InstanceTooLarge, IoFailure, MalformedDocument, NotInStrongCore
from .market import Allocation, HousingMarket
from .oracle import enumerate_allocations, strong_core_set
from .verify import price_certificate

ILP_DESK_N = 6


@dataclass(frozen=True)
class Row:
    name: str
    terms: tuple[tuple[str, int], ...]
    sense: str
    rhs: int

    def holds(self, values: Mapping[str, int]) -> bool:
        lhs = sum(c * values.get(v, 0) for v, c in self.terms)
        if self.sense == "<=":
            return lhs <= self.rhs
        if self.sense == ">=":
            return lhs >= self.rhs
        return lhs == self.rhs


@dataclass
class IlpModel:
    n: int
    rows: list[Row] = field(default_factory=list)
    binaries: list[str] = field(default_factory=list)
    generals: list[str] = field(default_factory=list)
    bounds: dict[str, tuple[int, int]] = field(default_factory=dict)
    labels: list[str] = field(default_factory=list)

    def row(self, name: str) -> Row:
        for r in self.rows:
            if r.name == name:
                return r
        raise KeyError(name)

    def violated(self, values: Mapping[str, int]) -> list[str]:
        bad = [r.name for r in self.rows if not r.holds(values)]
        for v, (lo, hi) in self.bounds.items():
            if not lo <= values.get(v, 0) <= hi:
                bad.append(f"bound:{v}")
        return bad


def y_var(i: int, j: int) -> str:
    return f"y_{i}_{j}"


def p_var(i: int) -> str:
    return f"p_{i}"


def _price_row(name: str, i: int, j: int, ys: list[str], big_m: int, rhs: int) -> Row:
    terms: list[tuple[str, int]] = []
    if i != j:
        terms += [(p_var(i), 1), (p_var(j), -1)]
    terms += [(y, -big_m) for y in ys]
    return Row(name, tuple(terms), "<=", rhs)


def build_ilp(market: HousingMarket) -> IlpModel:
    n = market.n
    model = IlpModel(n, labels=list(market.names))
    arcs = market.arcs
    for i in range(n):
        model.rows.append(Row(f"asg_out_{i}", tuple((y_var(i, j), 1) for j in market.acceptable(i)), "=", 1))
    for i in range(n):
        model.rows.append(Row(f"asg_in_{i}", tuple((y_var(j, i), 1) for j, h in arcs if h == i), "=", 1))
    for i, j in arcs:
        rel = market.prefs[i]
        acc = market.acceptable(i)
        # i keeps a house at least as good as j: the strict price rise is switched off
        weakly = [y_var(i, k) for k in acc if rel.weakly_prefers(k, j)]
        # i keeps a house strictly better than j: the weak price rise is switched off
        strictly = [y_var(i, k) for k in acc if rel.prefers(k, j)]
        model.rows.append(_price_row(f"price_core_{i}_{j}", i, j, weakly, n, -1))
        model.rows.append(_price_row(f"price_sc_{i}_{j}", i, j, strictly, n, 0))
    model.generals = [p_var(i) for i in range(n)]
    model.bounds = {p_var(i): (1, n) for i in range(n)}
    model.binaries = [y_var(i, j) for i, j in arcs]
    return model


def _format_terms(terms) -> str:
    parts = []
    for var, coef in terms:
        if coef == 0:
            continue
        sign = "-" if coef < 0 else "+"
        mag = abs(coef)
        body = var if mag == 1 else f"{mag} {var}"
        if not parts:
            parts.append(f"-{body}" if sign == "-" else body)
        else:
            parts.append(f"{sign} {body}")
    # LP rows need at least one variable
    return " ".join(parts) if parts else "0 p_0"


def _wrap(items: list[str], width: int = 16) -> list[str]:
    return [" " + " ".join(items[k:k + width]) for k in range(0, len(items), width)]


def lp_text(model: IlpModel) -> str:
    lines = ["\\ strong core feasibility model"]
    lines += [f"\\ agent {i} = {name}" for i, name in enumerate(model.labels)]
    lines += ["Maximize", " obj: 0 p_0", "Subject To"]
    for r in model.rows:
        lines.append(f" {r.name}: {_format_terms(r.terms)} {r.sense} {r.rhs}")
    lines.append("Bounds")
    for v in model.generals:
        lo, hi = model.bounds[v]
        lines.append(f" {lo} <= {v} <= {hi}")
    lines.append("General")
    lines += _wrap(model.generals)
    lines.append("Binary")
    lines += _wrap(model.binaries)
    lines.append("End")
    return "\n".join(lines) + "\n"


def write_lp(model: IlpModel, sink: str | os.PathLike | TextIO) -> str:
    """Write the model to a path or text stream and return the text."""
    text = lp_text(model)
    try:
        if hasattr(sink, "write"):
            sink.write(text)
        else:
            with open(sink, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
    except OSError as exc:
        raise IoFailure(f"cannot write LP file: {exc}") from exc
    return text


_TERM = re.compile(r"([+-]?)\s*(\d+)?\s*([A-Za-z_][A-Za-z0-9_]*)")
_SECTIONS = {"maximize", "minimize", "subject to", "bounds", "general", "binary", "end"}


def _parse_terms(text: str) -> tuple[tuple[str, int], ...]:
    terms = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TERM.match(text, pos)
        if not m:
            raise MalformedDocument(f"cannot parse LP terms near {text[pos:]!r}")
        sign, coef, var = m.groups()
        value = int(coef) if coef is not None else 1
        if sign == "-":
            value = -value
        terms.append((var, value))
        pos = m.end()
        while pos < len(text) and text[pos] == " ":
            pos += 1
    return tuple(t for t in terms if t[1] != 0)


def read_lp(source: str | TextIO) -> IlpModel:
    """Parse the subset of LP format produced by ``write_lp``."""
    text = source.read() if hasattr(source, "read") else source
    model = IlpModel(0)
    section = None
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("\\"):
            m = re.match(r"\\ agent (\d+) = (.*)$", line)
            if m:
                model.labels.append(m.group(2))
            continue
        if line.lower() in _SECTIONS:
            section = line.lower()
            continue
        if section == "subject to":
            m = re.match(r"(\w+):\s*(.*?)\s*(<=|>=|=)\s*(-?\d+)$", line)
            if not m:
                raise MalformedDocument(f"bad constraint line {line!r}")
            name, body, sense, rhs = m.groups()
            model.rows.append(Row(name, _parse_terms(body), sense, int(rhs)))
        elif section == "bounds":
            m = re.match(r"(-?\d+)\s*<=\s*(\w+)\s*<=\s*(-?\d+)$", line)
            if not m:
                raise MalformedDocument(f"bad bound line {line!r}")
            model.bounds[m.group(2)] = (int(m.group(1)), int(m.group(3)))
        elif section == "general":
            model.generals += line.split()
        elif section == "binary":
            model.binaries += line.split()
        elif section in ("maximize", "minimize"):
            continue
        elif section is None or section == "end":
            raise MalformedDocument(f"text outside any section: {line!r}")
    model.n = len(model.generals)
    return model


def assignment_values(market: HousingMarket, x: Allocation, prices=None) -> dict[str, int]:
    values = {y_var(i, j): int(x[i] == j) for i, j in market.arcs}
    if prices is not None:
        values.update({p_var(i): p for i, p in enumerate(prices)})
    return values


def feasible_prices(market: HousingMarket, x: Allocation) -> tuple[int, ...] | None:
    """Prices from the topological order of the weakly-better digraph, or None if none exist."""
    try:
        return price_certificate(market, x).prices
    except NotInStrongCore:
        return None


def price_feasible_set(market: HousingMarket, model: IlpModel | None = None) -> set[Allocation]:
    """Allocations whose y-vector extends to a feasible point, each checked row by row."""
    model = model or build_ilp(market)
    out = set()
    for x in enumerate_allocations(market, max_n=ILP_DESK_N):
        prices = feasible_prices(market, x)
        if prices is None:
            continue
        bad = model.violated(assignment_values(market, x, prices))
        if bad:
            raise AssertionError(f"constructed prices break rows {bad[:3]}")
        out.add(x)
    return out


def validate_ilp_feasible_set(market: HousingMarket) -> bool:
    if market.n > ILP_DESK_N:
        raise InstanceTooLarge(f"{market.n} agents exceeds ILP validation bound {ILP_DESK_N}")
    return price_feasible_set(market) == strong_core_set(market, max_n=ILP_DESK_N, method="brute")

