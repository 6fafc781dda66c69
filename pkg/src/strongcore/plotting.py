"""Figures and CSV tables for experiment reports."""
from __future__ import annotations

import csv
import os
from collections import Counter

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .experiments import loglog_slope  # noqa: E402

# fixed metadata keeps PNG bytes stable across runs
_PNG_META = {"Software": None}


def write_csv(path: str | os.PathLike, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def scaling_figure(report: dict, path: str | os.PathLike) -> None:
    rows = report["rows"]
    ns = [r["n"] for r in rows]
    med = [r["median_seconds"] for r in rows]
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.loglog(ns, med, "o-", label="median solve time")
    # cubic reference through the first point
    ref = [med[0] * (n / ns[0]) ** 3 for n in ns]
    ax.loglog(ns, ref, "--", color="grey", label="cubic growth")
    ax.set_xlabel("agents")
    ax.set_ylabel("seconds")
    ax.set_title(f"sparse partial orders, slope {loglog_slope(ns, med):.2f}")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, metadata=_PNG_META)
    plt.close(fig)


def scaling_table(report: dict, path: str | os.PathLike) -> None:
    write_csv(path, ["n", "median_seconds", "empty"],
              [[r["n"], f"{r['median_seconds']:.6f}", r["empty"]] for r in report["rows"]])


def ri_figure(report: dict, path: str | os.PathLike) -> None:
    pairs = Counter((t["sc_before"], t["sc_after"]) for t in report["trials"])
    sizes = sorted({k for pair in pairs for k in pair})
    fig, ax = plt.subplots(figsize=(5, 4))
    xs, ys, ss = zip(*[(b, a, 12 * c) for (b, a), c in sorted(pairs.items())]) if pairs else ((), (), ())
    ax.scatter(xs, ys, s=ss, alpha=0.6)
    ax.set_xticks(sizes)
    ax.set_yticks(sizes)
    ax.set_xlabel("strong-core size before")
    ax.set_ylabel("strong-core size after")
    s = report["summary"]
    ax.set_title(f"{s['trials']} improvements, {s['violations']} violations")
    fig.tight_layout()
    fig.savefig(path, metadata=_PNG_META)
    plt.close(fig)


def ri_table(report: dict, path: str | os.PathLike) -> None:
    cols = ["seed", "n", "p", "steps", "sc_before", "sc_after", "violations"]
    write_csv(path, cols, [[t[c] for c in cols] for t in report["trials"]])


def gsp_figure(report: dict, path: str | os.PathLike) -> None:
    sizes = Counter(len(t["coalition"]) for t in report["trials"])
    bad = Counter(len(t["coalition"]) for t in report["trials"] if t["counterexamples"])
    keys = sorted(sizes)
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.bar([str(k) for k in keys], [sizes[k] for k in keys], label="deviations tried")
    ax.bar([str(k) for k in keys], [bad[k] for k in keys], color="crimson", label="profitable")
    ax.set_xlabel("coalition size")
    ax.set_ylabel("count")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, metadata=_PNG_META)
    plt.close(fig)


def gsp_table(report: dict, path: str | os.PathLike) -> None:
    write_csv(path, ["instance_seed", "seed", "coalition", "outputs_before", "outputs_after", "counterexamples"],
              [[t["instance_seed"], t["seed"], " ".join(t["coalition"]), t["outputs_before"],
                t["outputs_after"], len(t["counterexamples"])] for t in report["trials"]])


RENDERERS = {
    "scaling": (scaling_figure, scaling_table),
    "ri": (ri_figure, ri_table),
    "gsp": (gsp_figure, gsp_table),
}


def render_report(report: dict, out_dir: str | os.PathLike, stem: str | None = None) -> list[str]:
    """Write ``<stem>.png`` and ``<stem>.csv`` for a report; returns the paths."""
    figure, table = RENDERERS[report["experiment"]]
    stem = stem or report["experiment"]
    os.makedirs(out_dir, exist_ok=True)
    png = os.path.join(out_dir, f"{stem}.png")
    table_path = os.path.join(out_dir, f"{stem}.csv")
    figure(report, png)
    table(report, table_path)
    return [png, table_path]
