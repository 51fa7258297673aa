"""Quadratic-regularization solvers: the plain double-precision baseline and
the multi-precision method with guaranteed or relaxed error bounds."""

from .config import (
    MPR2_GUARANTEED,
    MPR2_RELAXED,
    R2,
    SOLVER_MODES,
    SolverConfig,
    load_config,
    validate_params,
)
from .mpr2 import run_mpr2
from .r2 import run_r2
from .report import STATUSES, EvalCounters, RunReport
from .steps import (
    compute_candidate,
    compute_step,
    model_decrease,
    rho_and_accept,
    select_gradient_precision,
    select_objective_precision,
    stopping_threshold,
    update_sigma,
)


def solve(problem, cfg: SolverConfig | None = None) -> RunReport:
    """Dispatch on ``cfg.mode``."""
    cfg = cfg or SolverConfig()
    if cfg.mode == R2:
        return run_r2(problem, cfg)
    return run_mpr2(problem, cfg)


__all__ = [
    "SolverConfig", "validate_params", "load_config", "run_mpr2", "run_r2", "solve", "RunReport",
    "EvalCounters", "STATUSES", "R2", "MPR2_GUARANTEED", "MPR2_RELAXED", "SOLVER_MODES",
    "compute_step", "model_decrease", "compute_candidate", "stopping_threshold",
    "select_gradient_precision", "select_objective_precision", "rho_and_accept", "update_sigma",
]
