"""Plain quadratic regularization in double precision, ignoring rounding errors.

This is the comparison baseline.  It shares only the problem definitions and
the double-precision evaluator with the multi-precision solver; dot products
and norms are accumulated left to right exactly as the in-format kernels do,
so with every error source disabled both methods produce identical iterates.
"""

from __future__ import annotations

import math
from fractions import Fraction

from ..evalmodel import _rounded
from ..errors import FpDivisionByZero, FpDomainError, FpOverflow
from ..fpenv import DOUBLE
from ..problems import Problem
from .config import SolverConfig, validate_params
from .report import FIRST_ORDER, MAX_ITER, STALLED, EvalCounters, RunReport, trace_record

_KIND = _rounded(DOUBLE)


def _dot(a, b):
    acc = 0.0
    for i, (x, y) in enumerate(zip(a, b)):
        acc = x * y if i == 0 else acc + x * y
    return acc


def run_r2(problem: Problem, cfg: SolverConfig | None = None) -> RunReport:
    import warnings

    cfg = cfg or SolverConfig(mode="r2")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        validate_params(cfg)
    expr = problem.expr
    counters = EvalCounters()
    trace = []
    eta1, eta2 = cfg.eta1, cfg.eta2
    eps = float(cfg.eps)

    def f(x):
        counters.record("obj", "double", True)
        try:
            v = expr.value(_KIND, x)
        except (FpOverflow, FpDivisionByZero, FpDomainError):
            return None
        return v

    def grad(x):
        counters.record("grad", "double", True)
        return expr.value_and_grad(_KIND, x)[1]

    x = [float(v) for v in problem.x0]
    fx = f(x)
    iterates = [list(x)] if cfg.record_iterates else []
    sigma = Fraction(cfg.sigma0)
    k = successful = 0
    status, message = MAX_ITER, ""
    gnorm = float("nan")
    g = None
    if fx is None:
        status, message = STALLED, "objective evaluation failed at the start point"
    while fx is not None:
        if k >= cfg.max_iter:
            status = MAX_ITER
            break
        if g is None:
            try:
                g = grad(x)
            except (FpOverflow, FpDivisionByZero, FpDomainError) as exc:
                status, message = STALLED, f"gradient evaluation failed: {exc}"
                break
        sq = _dot(g, g)
        gnorm = math.sqrt(sq) if math.isfinite(sq) else math.inf
        if gnorm <= eps:
            status = FIRST_ORDER
            break
        sg = float(sigma)
        s = [-(gi / sg) for gi in g]
        dT = -_dot(g, s)
        if not math.isfinite(dT):
            status, message = STALLED, "step overflow"
            break
        if dT <= 0.0:
            status, message = STALLED, "zero model decrease"
            break
        c = [xi + si for xi, si in zip(x, s)]
        if all(ci == xi for ci, xi in zip(c, x)):
            status, message = STALLED, "candidate equals the current point"
            break
        fc = f(c) if all(map(math.isfinite, c)) else None
        if fc is None:
            rho = None
            accepted = False
        else:
            rho = (Fraction(fx) - Fraction(fc)) / Fraction(dT)
            accepted = rho >= eta1
        if cfg.trace:
            trace.append(trace_record(k=k, pi_x=1, pi_g=1, pi_c=1, pi_f=1 if fc is not None else None,
                                      sigma=sigma, gnorm=gnorm, dT=dT, mu=0.0,
                                      rho=float(rho) if rho is not None else -math.inf, accepted=accepted))
        if accepted:
            x, fx, g = c, fc, None
            successful += 1
            if cfg.record_iterates:
                iterates.append(list(c))
        if rho is not None and rho >= eta2:
            sigma = max(cfg.sigma_min, cfg.gamma1 * sigma)
        elif rho is None or rho < eta1:
            sigma = cfg.gamma3 * sigma
        k += 1
        if sigma > DOUBLE.max_finite:
            status, message = STALLED, "sigma overflow"
            break
    return RunReport(
        problem=problem.name, n=problem.n, solver="r2", status=status, iterations=k,
        successful=successful, x=list(x), x_format="double", f=fx if fx is not None else math.nan,
        gnorm=gnorm, counters=counters, trace=trace, message=message,
        iterates=iterates,
    )


__all__ = ["run_r2"]
