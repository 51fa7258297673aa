"""Run a problem selection under several solver configurations and aggregate."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from ..errors import EmptyIntersection
from ..problems import DEFAULT_SUITE, get_problem
from ..solver import SolverConfig, solve
from ..solver.report import (
    FIRST_ORDER,
    MAX_ITER,
    PRECISION_FAILURE,
    STALLED,
    EvalCounters,
    RunReport,
)
from .effort import EffortModel, EffortRatios, effort_ratios

# Short status column names used in tables.
STATUS_CODES = {FIRST_ORDER: "FO", MAX_ITER: "MI", PRECISION_FAILURE: "F", STALLED: "ST"}


def solver_label(cfg: SolverConfig) -> str:
    label = cfg.mode
    if cfg.error_model is not None:
        label += f"[{cfg.error_model}]"
    if cfg.relaxed and cfg.relax_a != 1:
        label += f"(a={float(cfg.relax_a):g})"
    return label


@dataclass(frozen=True)
class FormatShare:
    format: str
    total: int
    success: int
    percent: float
    success_percent: float


@dataclass(frozen=True)
class Comparison:
    solver: str
    baseline: str
    common: tuple
    solved: int
    baseline_solved: int
    ratios: EffortRatios


@dataclass
class SuiteReport:
    runs: list[RunReport] = field(default_factory=list)
    solvers: list[str] = field(default_factory=list)

    def runs_for(self, solver: str) -> list[RunReport]:
        return [r for r in self.runs if r.solver == solver]

    def status_counts(self, solver: str) -> dict[str, int]:
        counts = {s: 0 for s in STATUS_CODES}
        for r in self.runs_for(solver):
            counts[r.status] += 1
        return counts

    def counters(self, solver: str, problems: Optional[Iterable] = None) -> EvalCounters:
        keep = None if problems is None else set(problems)
        total = EvalCounters()
        for r in self.runs_for(solver):
            if keep is None or (r.problem, r.n) in keep:
                total = total.merge(r.counters)
        return total

    def format_shares(self, solver: str, kind: str) -> list[FormatShare]:
        """Share of ``kind`` evaluations per format, with per-format success rates."""
        c = self.counters(solver)
        grand = c.total(kind)
        out = []
        for fmt in _format_order(c.formats()):
            t, s = c.total(kind, fmt), c.successes(kind, fmt)
            if t == 0:
                continue
            out.append(FormatShare(fmt, t, s, 100.0 * t / grand, 100.0 * s / t))
        return out

    def solved(self, solver: str) -> set:
        return {(r.problem, r.n) for r in self.runs_for(solver) if r.solved}

    def compare(self, solver: str, baseline: str = "r2", model: EffortModel | None = None) -> Comparison:
        """Effort ratios of ``solver`` against ``baseline`` on the problems both solved."""
        common = self.solved(solver) & self.solved(baseline)
        if not common:
            raise EmptyIntersection(f"{solver} and {baseline} solved no common problem")
        ratios = effort_ratios(self.counters(solver, common), self.counters(baseline, common), model)
        return Comparison(solver, baseline, tuple(sorted(common)), len(self.solved(solver)),
                          len(self.solved(baseline)), ratios)


def _format_order(names):
    from ..fpenv import KNOWN_FORMATS

    return sorted(names, key=lambda f: (KNOWN_FORMATS[f].bits, KNOWN_FORMATS[f].precision))


def _run_one(args) -> RunReport:
    name, n, cfg, label = args
    report = solve(get_problem(name, n), cfg)
    report.solver = label
    report.trace = []
    return report


def run_suite(configs: SolverConfig | Sequence[SolverConfig], selection: Sequence = DEFAULT_SUITE,
              labels: Optional[Sequence[str]] = None, workers: int = 1) -> SuiteReport:
    """Run every (problem, dimension) in ``selection`` under every configuration.

    Results are ordered by configuration, then by selection order, whatever the
    number of worker processes.  Per-problem failures show up as statuses.
    """
    if isinstance(configs, SolverConfig):
        configs = [configs]
    if not selection:
        raise ValueError("empty problem selection")
    labels = list(labels) if labels is not None else [solver_label(c) for c in configs]
    if len(set(labels)) != len(labels):
        raise ValueError(f"duplicate solver labels {labels}")
    jobs = [(name, n, cfg.replace(trace=False), label)
            for cfg, label in zip(configs, labels) for name, n in selection]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            runs = list(pool.map(_run_one, jobs))
    else:
        runs = [_run_one(j) for j in jobs]
    return SuiteReport(runs=runs, solvers=labels)


def parse_selection(text: str) -> list[tuple[str, int]]:
    """``"default"`` or a comma list of ``name`` / ``name:n`` entries."""
    from ..problems import default_dimension

    text = text.strip()
    if text in ("", "default"):
        return list(DEFAULT_SUITE)
    out = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        name, _, n = item.partition(":")
        out.append((name, int(n) if n else default_dimension(name)))
    for name, n in out:
        get_problem(name, n)
    return out


__all__ = ["SuiteReport", "FormatShare", "Comparison", "run_suite", "solver_label", "parse_selection",
           "STATUS_CODES"]
