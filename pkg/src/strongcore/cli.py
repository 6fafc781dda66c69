"""Command-line entry point.

Exit codes: 0 result found, 2 empty result (or not a member), 3 instance too
large for an exhaustive routine, 1 any input or validation error.  Only the
result JSON goes to stdout.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

from .errors import InstanceTooLarge, IoFailure, MalformedDocument, NotAnImprovement, StrongCoreError
from .experiments import (
    KINDS,
    GeneratorSpec,
    ImprovementStep,
    apply_improvement,
    generate,
    gsp_trials,
    ri_trials,
    scaling_experiment,
)
from .ilp import build_ilp, write_lp
from .market import Instance, parse_allocation, parse_instance, serialize_instance
from .oracle import core_set, quint_wako_weak, strong_core_set, ttc_core
from .scfa import enumerate_scfa_outputs, solve_scffa
from .verify import find_strict_blocking_cycle, find_weak_blocking_cycle, price_certificate

OK, ERROR, EMPTY, TOO_LARGE = 0, 1, 2, 3


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc.strerror}") from None


def _load(path: str) -> Instance:
    return parse_instance(_read(path))


def _emit(doc) -> None:
    sys.stdout.write(json.dumps(doc, indent=2) + "\n")


def _sorted_allocations(market, xs):
    return [x.to_names(market) for x in sorted(xs, key=lambda x: x.assignment)]


def cmd_solve(args) -> int:
    instance = _load(args.instance)
    market = instance.market
    x, trace = solve_scffa(instance)
    doc: dict = {"status": "empty" if x is None else "allocation"}
    if x is not None:
        doc["allocation"] = x.to_names(market)
    if args.trace:
        doc["trace"] = trace.to_dict(market)
    if args.certify and x is not None:
        doc["certificate"] = price_certificate(market, x).to_dict(market)
    _emit(doc)
    return EMPTY if x is None else OK


def cmd_check(args) -> int:
    instance = _load(args.instance)
    market = instance.market
    x = parse_allocation(market, _read(args.allocation))
    if args.mode == "core":
        cert = find_strict_blocking_cycle(market, x)
    else:
        cert = find_weak_blocking_cycle(market, x)
    doc = {"mode": args.mode, "member": not cert}
    if cert:
        doc["certificate"] = cert.to_dict(market)
    _emit(doc)
    return EMPTY if cert else OK


def cmd_enumerate(args) -> int:
    instance = _load(args.instance)
    market = instance.market
    if args.what == "outputs":
        xs = enumerate_scfa_outputs(instance, args.max_n)
    elif args.what == "core":
        xs = core_set(market, instance.forbidden, args.max_n)
    else:
        xs = strong_core_set(market, instance.forbidden, args.max_n)
    if instance.forced and args.what != "outputs":
        xs = {x for x in xs if all(x[a] == b for a, b in instance.forced)}
    _emit({"what": args.what, "count": len(xs), "allocations": _sorted_allocations(market, xs)})
    return OK if xs else EMPTY


def cmd_qw(args) -> int:
    instance = _load(args.instance)
    x = quint_wako_weak(instance.market, instance.forbidden)
    if x is None:
        _emit({"status": "empty"})
        return EMPTY
    _emit({"status": "allocation", "allocation": x.to_names(instance.market)})
    return OK


def cmd_ttc(args) -> int:
    market = _load(args.instance).market
    _emit({"status": "allocation", "allocation": ttc_core(market).to_names(market)})
    return OK


def cmd_emit_ilp(args) -> int:
    market = _load(args.instance).market
    model = build_ilp(market)
    if args.out == "-":
        write_lp(model, sys.stdout)
        return OK
    write_lp(model, args.out)
    _emit({"path": args.out, "rows": len(model.rows), "binaries": len(model.binaries),
           "generals": len(model.generals)})
    return OK


def cmd_gen(args) -> int:
    spec = GeneratorSpec(args.kind, args.n, density=args.density, seed=args.seed)
    sys.stdout.write(serialize_instance(Instance(generate(spec))))
    return OK


def _parse_steps(market, text: str) -> list[ImprovementStep]:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedDocument(f"invalid JSON: {exc}") from None
    if isinstance(doc, dict):
        doc = doc.get("steps")
    if not isinstance(doc, list):
        raise MalformedDocument("improvement file must hold a list of steps")
    steps = []
    for item in doc:
        if not isinstance(item, dict) or "p" not in item or "q" not in item:
            raise MalformedDocument("each step needs \"p\" and \"q\"")

        def pairs(key):
            try:
                return frozenset((market.index(b), market.index(c)) for b, c in item.get(key, []))
            except (TypeError, ValueError):
                raise MalformedDocument(f'"{key}" must be a list of [name, name] pairs') from None

        steps.append(ImprovementStep(market.index(item["p"]), market.index(item["q"]),
                                     pairs("add"), pairs("remove")))
    return steps


def cmd_improve(args) -> int:
    instance = _load(args.instance)
    steps = _parse_steps(instance.market, _read(args.steps))
    improved = apply_improvement(instance.market, steps)
    forbidden = frozenset(arc for arc in instance.forbidden if improved.has_arc(*arc))
    sys.stdout.write(serialize_instance(Instance(improved, forbidden)))
    return OK


def cmd_experiment(args) -> int:
    if args.name == "ri":
        report = ri_trials(args.trials, args.seed, max_n=args.max_n)
    elif args.name == "gsp":
        report = gsp_trials(args.trials, args.seed, max_n=args.max_n)
    else:
        sizes = [int(s) for s in args.sizes.split(",")]
        report = scaling_experiment(sizes, reps=args.trials, seed=args.seed, kind=args.kind)
    if not args.out:
        _emit(report)
        return OK
    from .plotting import render_report

    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, f"{args.name}.json")
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(json.dumps(report, indent=2) + "\n")
        files = [path] + render_report(report, args.out, args.name)
    except OSError as exc:
        raise IoFailure(f"cannot write report: {exc}") from None
    _emit({"experiment": args.name, "summary": report.get("summary", {"loglog_slope": report.get("loglog_slope")}),
           "files": files})
    return OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="strongcore", description="Strong-core housing market toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="find a strong-core allocation honoring forbidden and forced arcs")
    p.add_argument("instance")
    p.add_argument("--trace", action="store_true")
    p.add_argument("--certify", action="store_true", help="attach a price vector")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("check", help="test an allocation for core or strong-core membership")
    p.add_argument("instance")
    p.add_argument("allocation")
    p.add_argument("--mode", choices=["core", "strong-core"], default="strong-core")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("enumerate", help="list every strong-core (or core, or solver) allocation")
    p.add_argument("instance")
    p.add_argument("--max-n", type=int, default=None)
    p.add_argument("--what", choices=["strong-core", "core", "outputs"], default="strong-core")
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("qw", help="weak-order reference algorithm")
    p.add_argument("instance")
    p.set_defaults(func=cmd_qw)

    p = sub.add_parser("ttc", help="top trading cycles on undominated arcs")
    p.add_argument("instance")
    p.set_defaults(func=cmd_ttc)

    p = sub.add_parser("emit-ilp", help="write the integer program in LP format")
    p.add_argument("instance")
    p.add_argument("-o", "--out", default="-")
    p.set_defaults(func=cmd_emit_ilp)

    p = sub.add_parser("gen", help="generate a random market")
    p.add_argument("--kind", choices=KINDS, default="partial-dag")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--density", type=float, default=0.6)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("improve", help="apply improvement steps and print the new instance")
    p.add_argument("instance")
    p.add_argument("steps")
    p.set_defaults(func=cmd_improve)

    p = sub.add_parser("experiment", help="run a seeded experiment and write its report")
    p.add_argument("name", choices=["ri", "gsp", "scaling"])
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-n", type=int, default=6)
    p.add_argument("--sizes", default="100,200,400,800")
    p.add_argument("--kind", choices=KINDS, default="partial-dag")
    p.add_argument("--out", default=None, help="directory for JSON, CSV and PNG output")
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InstanceTooLarge as exc:
        _emit({"error": "InstanceTooLarge", "message": str(exc)})
        return TOO_LARGE
    except StrongCoreError as exc:
        doc = {"error": type(exc).__name__, "message": str(exc)}
        if isinstance(exc, NotAnImprovement):
            doc["condition"] = exc.condition
        _emit(doc)
        return ERROR
    except ValueError as exc:
        _emit({"error": "InvalidArgument", "message": str(exc)})
        return ERROR


if __name__ == "__main__":
    sys.exit(main())
