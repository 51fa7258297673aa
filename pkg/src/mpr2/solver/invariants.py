"""Runtime checks of the convergence theory on guaranteed-mode runs.

Each check returns None when it holds and a message otherwise.  The checks use
exact rational evaluation of the objective and gradient, so they are
independent of the rounded and interval evaluations the solver itself uses.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Optional, Sequence

from ..defined import INF, dr
from ..errbounds import ErrorContext, beta_from_gamma, gamma_n
from ..fpenv import FpFormat
from ..problems import Enclosure, Problem, exact_eval, exact_grad, upper_abs
from .config import SolverConfig


def very_successful_threshold(cfg: SolverConfig, L, alpha, lam):
    """Right-hand side ``(1 - eta2 - eta0 - kappa/2) / (alpha L (1 + lam)^2)``."""
    c = dr(1 - cfg.eta2 - cfg.eta0 - cfg.kappa_mu / 2)
    return c / (dr(alpha) * dr(L) * (1 + dr(lam)) ** 2)


def check_very_successful(cfg: SolverConfig, L, sigma, alpha, lam, rho) -> Optional[str]:
    """If ``1/sigma`` is below the threshold the iteration must be very successful."""
    if dr(1) / dr(sigma) <= very_successful_threshold(cfg, L, alpha, lam) and dr(rho) < dr(cfg.eta2):
        return f"1/sigma={float(1 / dr(sigma)):.3g} below threshold but rho={float(rho):.6g} < eta2"
    return None


def sigma_max(cfg: SolverConfig, L, ctx: ErrorContext, stack: Sequence[FpFormat]):
    """Largest regularization value reachable, maximized over the formats."""
    c = dr(1 - cfg.eta2 - cfg.eta0 - cfg.kappa_mu / 2)
    if c <= 0:
        return INF
    u_min = min(f.u for f in stack)
    lam_max = max(dr(cfg.kappa_mu) * (1 - u_min) / ctx.at(f).alpha_n1 for f in stack)
    best = max(dr(cfg.gamma3) * dr(L) * (1 + lam_max) ** 2 * ctx.at(f).alpha_n1 / c for f in stack)
    return best


def check_sigma(sigma, bound, sigma0) -> Optional[str]:
    if dr(sigma) > max(dr(bound), dr(sigma0)):
        return f"sigma={float(sigma):.6g} exceeds max(sigma_max={float(bound):.6g}, sigma0)"
    return None


def successful_iteration_bound(cfg: SolverConfig, problem: Problem, ctx: ErrorContext,
                               stack: Sequence[FpFormat], f0):
    """Upper bound on the number of successful iterations (infinite when vacuous)."""
    if problem.f_low is None or problem.L_hint is None:
        return None
    denom_eta = dr(cfg.eta1 - 2 * cfg.eta0)
    smax = sigma_max(cfg, problem.L_hint, ctx, stack)
    if denom_eta <= 0 or smax == INF:
        return INF
    u_max = max(f.u for f in stack)
    n = problem.n
    beta = beta_from_gamma(gamma_n(n + 2, u_max, cfg.gamma_formula))
    g1 = gamma_n(n + 1, u_max, cfg.gamma_formula)
    k = dr(cfg.kappa_mu)
    kappa_s = ((1 + beta) / (1 - beta) * (1 + k) / (1 - u_max)) ** 2 * smax / (denom_eta * (1 - g1))
    return dr(cfg.eps) ** -2 * kappa_s * (dr(f0) - dr(problem.f_low))


def _bounds(v) -> tuple[Fraction, Fraction]:
    if isinstance(v, Enclosure):
        return v.lo, v.hi
    return Fraction(v), Fraction(v)


def check_true_decrease(cfg: SolverConfig, problem: Problem, x_old, x_new, dT: float) -> Optional[str]:
    """Accepted steps decrease the exact objective by at least ``(eta1 - 2 eta0) dT``."""
    lo_old, hi_old = _bounds(exact_eval(problem, x_old))
    lo_new, hi_new = _bounds(exact_eval(problem, x_new))
    best = hi_old - lo_new
    need = (cfg.eta1 - 2 * cfg.eta0) * Fraction(dT)
    if best < need:
        return f"exact decrease {float(best):.6g} < (eta1 - 2 eta0) dT = {float(need):.6g}"
    return None


def exact_gradient_norm_upper(problem: Problem, x) -> Fraction:
    """Upper bound on the squared exact gradient norm."""
    return sum((upper_abs(c) ** 2 for c in exact_grad(problem, x)), Fraction(0))


def check_first_order(cfg: SolverConfig, problem: Problem, x) -> Optional[str]:
    sq = exact_gradient_norm_upper(problem, x)
    if sq > Fraction(cfg.eps) ** 2:
        return f"exact gradient norm {math.sqrt(float(sq)):.6g} exceeds eps"
    return None


__all__ = [
    "very_successful_threshold", "check_very_successful", "sigma_max", "check_sigma",
    "successful_iteration_bound", "check_true_decrease", "check_first_order",
    "exact_gradient_norm_upper",
]
