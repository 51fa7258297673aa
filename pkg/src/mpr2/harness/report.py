"""Suite output files.

``csv``
    ``runs.csv`` (one row per run) and ``evals.csv`` (one row per run,
    evaluation kind and format with total and successful counts).
``json``
    ``suite.json``: ``{"schema": SCHEMA, "solvers": [...], "runs": [...]}``
    where each run is :meth:`RunReport.to_dict`.
``text``
    ``table.txt``: per solver, status counts and the share of evaluations in
    each format with its success rate, then effort ratios against ``r2``.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

from ..errors import EmptyIntersection
from ..solver.report import EvalCounters, RunReport
from .effort import EffortModel
from .suite import STATUS_CODES, SuiteReport

SCHEMA = "mpr2-suite/1"
RUN_COLUMNS = ("solver", "problem", "n", "status", "iterations", "successful", "f", "gnorm", "x_format",
               "violations")
EVAL_COLUMNS = ("solver", "problem", "n", "kind", "format", "total", "success")
REPORT_FORMATS = ("csv", "json", "text")


def _write_csv(report: SuiteReport, out: Path) -> list[Path]:
    runs, evals = out / "runs.csv", out / "evals.csv"
    with open(runs, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(RUN_COLUMNS)
        for r in report.runs:
            w.writerow([r.solver, r.problem, r.n, r.status, r.iterations, r.successful, repr(float(r.f)),
                        repr(float(r.gnorm)), r.x_format, len(r.violations)])
    with open(evals, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(EVAL_COLUMNS)
        for r in report.runs:
            for kind, per in r.counters.to_dict().items():
                for fmt, v in per.items():
                    w.writerow([r.solver, r.problem, r.n, kind, fmt, v["total"], v["success"]])
    return [runs, evals]


def _jsonable_float(v):
    v = float(v)
    return v if math.isfinite(v) else repr(v)


def suite_to_dict(report: SuiteReport) -> dict:
    runs = []
    for r in report.runs:
        d = r.to_dict()
        d["f"] = _jsonable_float(d["f"])
        d["gnorm"] = _jsonable_float(d["gnorm"])
        runs.append(d)
    return {"schema": SCHEMA, "solvers": list(report.solvers), "runs": runs}


def suite_from_dict(d: dict) -> SuiteReport:
    if d.get("schema") != SCHEMA:
        raise ValueError(f"unsupported schema {d.get('schema')!r}")
    runs = []
    for item in d["runs"]:
        item = dict(item)
        item["f"] = float(item["f"])
        item["gnorm"] = float(item["gnorm"])
        runs.append(RunReport.from_dict(item))
    return SuiteReport(runs=runs, solvers=list(d["solvers"]))


def load_suite(path) -> SuiteReport:
    """Read ``suite.json`` (or a directory containing it)."""
    path = Path(path)
    if path.is_dir():
        path = path / "suite.json"
    return suite_from_dict(json.loads(path.read_text()))


def format_table(report: SuiteReport, baseline: str = "r2") -> str:
    """Plain-text tables of statuses, per-format shares and effort ratios."""
    lines = []
    for solver in report.solvers:
        counts = report.status_counts(solver)
        lines.append(f"== {solver}")
        lines.append("  " + "  ".join(f"{STATUS_CODES[s]}={c}" for s, c in counts.items()))
        for kind in EvalCounters.KINDS:
            shares = report.format_shares(solver, kind)
            cells = [f"{s.format} {s.percent:5.1f}% ({s.success_percent:5.1f}%)" for s in shares]
            lines.append(f"  {kind:<4} " + (" | ".join(cells) if cells else "-"))
        if solver != baseline and baseline in report.solvers:
            try:
                cmp = report.compare(solver, baseline, EffortModel())
            except EmptyIntersection:
                lines.append(f"  effort vs {baseline}: no commonly solved problem")
            else:
                r = cmp.ratios
                lines.append(
                    f"  effort vs {baseline} on {len(cmp.common)} common: "
                    f"obj time {float(r.obj_time):.3f} energy {float(r.obj_energy):.3f}; "
                    f"grad time {float(r.grad_time):.3f} energy {float(r.grad_energy):.3f}; "
                    f"solved {cmp.solved}/{cmp.baseline_solved}")
    return "\n".join(lines) + "\n"


def emit_report(report: SuiteReport, fmt: str, out_dir) -> list[Path]:
    """Write ``report`` into ``out_dir`` in one of :data:`REPORT_FORMATS`; returns the paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if fmt == "csv":
        return _write_csv(report, out)
    if fmt == "json":
        p = out / "suite.json"
        p.write_text(json.dumps(suite_to_dict(report), indent=1))
        return [p]
    if fmt in ("text", "text-table"):
        p = out / "table.txt"
        p.write_text(format_table(report))
        return [p]
    raise ValueError(f"unknown report format {fmt!r}")


def profile_costs(report: SuiteReport, metric: str, model: EffortModel | None = None) -> dict:
    """``costs[solver][(problem, n)]`` for a metric ``<obj|grad>_<time|energy>``; unsolved is inf."""
    model = model or EffortModel()
    kind, _, measure = metric.partition("_")
    if kind not in EvalCounters.KINDS or measure not in ("time", "energy"):
        raise ValueError(f"unknown metric {metric!r}")
    costs: dict = {}
    for solver in report.solvers:
        row = {}
        for r in report.runs_for(solver):
            t, e = model.cost(r.counters, kind)
            v = t if measure == "time" else e
            row[(r.problem, r.n)] = v if r.solved and v > 0 else math.inf
        costs[solver] = row
    return costs


PROFILE_METRICS = ("obj_time", "obj_energy", "grad_time", "grad_energy")

__all__ = ["emit_report", "load_suite", "suite_to_dict", "suite_from_dict", "format_table", "profile_costs",
           "SCHEMA", "RUN_COLUMNS", "EVAL_COLUMNS", "REPORT_FORMATS", "PROFILE_METRICS"]
