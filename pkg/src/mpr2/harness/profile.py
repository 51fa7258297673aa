"""Performance profiles: for each solver, the fraction of problems it solves
within a factor ``tau`` of the best solver's cost."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

# tau = 2^(i/20), i = 0..100, i.e. 1 to 32
TAU_GRID = tuple(2.0 ** (i / 20) for i in range(101))
PROFILE_COLUMNS = ("metric", "solver", "tau", "fraction")


@dataclass(frozen=True)
class ProfileData:
    solvers: tuple
    taus: tuple
    values: dict  # solver -> tuple of fractions aligned with taus

    def at(self, solver: str, tau: float) -> float:
        return self.values[solver][self.taus.index(tau)]


def _exact(v):
    if isinstance(v, float):
        return math.inf if math.isinf(v) else Fraction(v)
    return Fraction(v)


def performance_profile(costs: Mapping[str, Mapping], taus=TAU_GRID) -> ProfileData:
    """``costs[solver][problem]`` > 0, or ``math.inf`` when unsolved.

    Every solver must list the same problems.  A problem no solver solved counts
    as a failure for all of them.  Ratios are compared with ``tau`` exactly.
    """
    solvers = tuple(costs)
    if not solvers:
        return ProfileData((), tuple(taus), {})
    problems = list(costs[solvers[0]])
    for s in solvers:
        if set(costs[s]) != set(problems):
            raise ValueError(f"solver {s!r} does not cover the same problems")
    ratios = {s: [] for s in solvers}
    for p in problems:
        vals = {s: _exact(costs[s][p]) for s in solvers}
        for s, v in vals.items():
            if v != math.inf and v <= 0:
                raise ValueError(f"non-positive cost {costs[s][p]} for {s} on {p}")
        finite = [v for v in vals.values() if v != math.inf]
        best = min(finite) if finite else None
        for s in solvers:
            ratios[s].append(math.inf if best is None or vals[s] == math.inf else vals[s] / best)
    n = len(problems)
    values = {}
    for s in solvers:
        row = []
        for tau in taus:
            t = Fraction(tau)
            hit = sum(1 for r in ratios[s] if r != math.inf and r <= t)
            row.append(hit / n if n else 0.0)
        values[s] = tuple(row)
    return ProfileData(solvers, tuple(taus), values)


def write_profile_csv(profiles: Mapping[str, ProfileData], path) -> None:
    """Long format: one row per (metric, solver, tau)."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(PROFILE_COLUMNS)
        for metric, prof in profiles.items():
            for s in prof.solvers:
                for tau, frac in zip(prof.taus, prof.values[s]):
                    w.writerow([metric, s, repr(tau), repr(float(frac))])


def read_profile_csv(path) -> dict:
    """Inverse of :func:`write_profile_csv`; raises ValueError on a bad header or row."""
    out: dict = {}
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r, None)
        if tuple(header or ()) != PROFILE_COLUMNS:
            raise ValueError(f"bad profile header {header}")
        for row in r:
            if len(row) != 4:
                raise ValueError(f"bad profile row {row}")
            metric, solver, tau, frac = row[0], row[1], float(row[2]), float(row[3])
            if not 0.0 <= frac <= 1.0:
                raise ValueError(f"fraction out of range in {row}")
            out.setdefault(metric, {}).setdefault(solver, []).append((tau, frac))
    return out


def plot_profiles(profiles: Mapping[str, ProfileData], path) -> None:
    """One panel per metric, log2 tau axis, written to ``path``."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    metrics = list(profiles)
    fig, axes = plt.subplots(1, max(len(metrics), 1), figsize=(4.2 * max(len(metrics), 1), 3.4),
                             squeeze=False)
    for ax, metric in zip(axes[0], metrics):
        prof = profiles[metric]
        for s in prof.solvers:
            ax.step(prof.taus, prof.values[s], where="post", label=s)
        ax.set_xscale("log", base=2)
        ax.set_ylim(0, 1.02)
        ax.set_xlabel("tau")
        ax.set_title(metric)
        ax.grid(alpha=0.3)
    axes[0][0].set_ylabel("fraction of problems")
    axes[0][0].legend(loc="lower right", fontsize="small")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


__all__ = ["ProfileData", "performance_profile", "write_profile_csv", "read_profile_csv", "plot_profiles",
           "TAU_GRID", "PROFILE_COLUMNS"]
