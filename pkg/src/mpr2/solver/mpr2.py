"""The multi-precision quadratic-regularization solver.

Every computed quantity carries its format.  Per iteration the solver

1. evaluates the gradient at the current point in format ``pi_g`` (only after
   a successful iteration or a precision increase) and tests termination;
2. forms the step ``-g/sigma`` and the model decrease, bounds the rounding
   noise coefficient ``mu`` and raises the candidate or gradient format until
   ``mu <= kappa_mu`` (``a * mu`` in relaxed mode);
3. builds the candidate in format ``pi_c`` and evaluates the objective at the
   current point and the candidate in formats whose error bounds do not
   exceed ``eta0`` times the model decrease;
4. accepts or rejects the candidate from the ratio ``rho``;
5. updates ``sigma`` by powers of two.

Guaranteed mode stops with PrecisionFailure when the finest format cannot meet
a condition; relaxed mode then proceeds with the finest format.
"""

from __future__ import annotations

import warnings
from fractions import Fraction
from typing import Optional

from ..defined import INF, ZERO, dr
from ..errbounds import ErrorContext, beta_n, lambda_k, mu_k, phi_bound, u_prime
from ..errors import (
    DegenerateStep,
    FpDivisionByZero,
    FpDomainError,
    FpOverflow,
    SigmaOverflow,
    ZeroGradientBound,
)
from ..evalmodel import EvalResult, eval_gradient, eval_objective
from ..fpenv import DOUBLE, FpFormat, TaggedValue, TaggedVector, cast, fp_norm, lowest_exact_format
from ..errbounds import gamma_rho
from ..problems import Problem, exact_eval
from . import invariants as inv
from .config import SolverConfig, validate_params
from .report import (
    FIRST_ORDER,
    MAX_ITER,
    PRECISION_FAILURE,
    STALLED,
    EvalCounters,
    RunReport,
    trace_record,
)
from .steps import (
    compute_candidate,
    compute_step,
    model_decrease,
    rho_and_accept,
    select_objective_precision,
    sigma_fits,
    stop_test,
    update_sigma,
)

_ARITH = (FpOverflow, FpDivisionByZero, FpDomainError)


class _Done(Exception):
    def __init__(self, status, message=""):
        self.status = status
        self.message = message


class _Restart(Exception):
    """Gradient precision was raised; go back to the gradient evaluation."""


class MPR2Run:
    def __init__(self, problem: Problem, cfg: SolverConfig):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            validate_params(cfg)
        self.p = problem
        self.cfg = cfg
        self.stack = cfg.stack
        self.top = len(self.stack)
        self.emode = cfg.evaluation_mode
        self.exact = self.emode == "none"
        self.relaxed = cfg.relaxed
        self.ctx = ErrorContext(problem.n, cfg.gamma_formula, self.stack)
        self.counters = EvalCounters()
        self.trace: list[dict] = []
        self.violations: list[str] = []
        self.checking = cfg.check_invariants and self.emode == "guaranteed"
        self.label = cfg.mode if cfg.error_model is None else f"{cfg.mode}[{cfg.error_model}]"

    # -- helpers ------------------------------------------------------------

    def F(self, idx: int) -> FpFormat:
        return self.stack[idx - 1]

    def u(self, fmt: FpFormat):
        return ZERO if self.exact else fmt.u

    def _obj(self, x: TaggedVector, fmt: FpFormat) -> Optional[EvalResult]:
        self.counters.record("obj", fmt.name)
        try:
            return eval_objective(self.p, x, fmt, self.emode)
        except _ARITH:
            return None

    def _norm_from(self, v: TaggedVector, lowest: int) -> TaggedValue:
        """In-format norm in the least format >= ``lowest`` where it does not overflow."""
        for idx in range(lowest, self.top + 1):
            fmt = self.F(idx)
            try:
                return fp_norm(cast(v, fmt))
            except FpOverflow:
                continue
        raise FpOverflow("norm overflows every format")

    def _stop_norm(self, g: TaggedVector) -> TaggedValue:
        """Gradient norm for the termination test.

        A norm whose accumulation underflowed can be far below the true norm,
        so it is recomputed in the next wider format (the upcast is exact).
        """
        fmt = g.fmt
        while True:
            try:
                gn = fp_norm(TaggedVector(g.values, fmt))
            except FpOverflow:
                return TaggedValue(float("inf"), fmt)
            if not gn.underflow or fmt.index >= self.top:
                return gn
            self._flag("norm_underflow")
            fmt = self.F(fmt.index + 1)

    def _flag(self, name):
        self.flags.append(name)

    # -- phases -------------------------------------------------------------

    def _drop_gradient(self):
        self.g = None
        self.pi_g += 1
        self._flag("raise_g")

    def _gradient(self):
        """Steps 1-2: gradient, termination, step, noise test."""
        cfg = self.cfg
        while True:
            fmt_g = self.F(self.pi_g)
            if self.g is None:
                if not sigma_fits(self.sigma, fmt_g) and self.pi_g < self.top:
                    self.pi_g += 1
                    continue
                self.counters.record("grad", fmt_g.name)
                try:
                    self.g = eval_gradient(self.p, self.x, fmt_g, self.emode)
                except ZeroGradientBound as z:
                    self._flag("zero_gradient")
                    if z.radius <= dr(cfg.eps):
                        self.counters.succeed("grad", fmt_g.name)
                        self.gnorm = 0.0
                        raise _Done(FIRST_ORDER, "zero computed gradient with enclosure radius below eps")
                    if self.pi_g < self.top:
                        self.pi_g += 1
                        continue
                    raise _Done(PRECISION_FAILURE, "zero computed gradient with wide enclosure")
                except _ARITH as exc:
                    if self.pi_g < self.top:
                        self.pi_g += 1
                        continue
                    raise _Done(STALLED, f"gradient evaluation failed: {exc}")
                self.g_pending = True
            g = self.g.value
            gn = self._stop_norm(g)
            self.gnorm = gn.value
            beta = beta_n(self.p.n + 2, self.u(gn.fmt), cfg.gamma_formula)
            if gn.value != float("inf") and stop_test(gn, cfg.eps, self.g.omega, beta, self.relaxed):
                self._succeed_gradient()
                raise _Done(FIRST_ORDER)
            if not sigma_fits(self.sigma, fmt_g):
                if self.pi_g < self.top:
                    self._drop_gradient()
                    continue
                raise _Done(STALLED, "sigma not representable")
            try:
                s = compute_step(g, self.sigma)
                if s.underflow and self.pi_g < self.top:
                    self._drop_gradient()
                    continue
                dT = model_decrease(g, s)
            except FpOverflow:
                if self.pi_g < self.top:
                    self._drop_gradient()
                    continue
                raise _Done(STALLED, "step overflow")
            if dT.value < 0.0:
                self.violations.append(f"k={self.k}: negative model decrease {dT.value!r}")
            if dT.value <= 0.0:
                if self.pi_g < self.top:
                    self._drop_gradient()
                    continue
                raise _Done(STALLED, "zero model decrease")
            self.s, self.dT = s, dT
            if self._noise_test():
                return

    def _succeed_gradient(self):
        if self.g_pending:
            self.counters.succeed("grad", self.g.fmt.name)
            self.g_pending = False

    def _noise_test(self) -> bool:
        """Raise pi_c / pi_g until mu passes; False means re-evaluate the gradient."""
        cfg = self.cfg
        fmt_g = self.F(self.pi_g)
        try:
            norm_s = self._norm_from(self.s, self.pi_g)
            if self.norm_x is None:
                self.norm_x = self._norm_from(self.x, self.pi_x)
        except FpOverflow as exc:
            raise _Done(STALLED, str(exc))
        u_g = self.u(fmt_g)
        try:
            phi = phi_bound(self.norm_x, norm_s, self.u(self.norm_x.fmt), u_g, self.p.n, cfg.gamma_formula)
        except DegenerateStep:
            phi = INF
        while True:
            u_c = self.u(self.F(self.pi_c))
            lam = lambda_k(phi, u_prime(u_g, u_c)) if phi != INF else INF
            mu = mu_k(self.ctx, u_g, self.g.omega, lam) if lam != INF else INF
            self.phi, self.lam, self.mu = phi, lam, mu
            scaled = dr(cfg.relax_a) * mu if self.relaxed else mu
            if scaled <= dr(cfg.kappa_mu):
                self._succeed_gradient()
                return True
            if self.pi_c < self.pi_g:
                self.pi_c += 1
                self._flag("raise_c")
                continue
            if self.pi_g < self.top:
                self._drop_gradient()
                return False
            if self.relaxed:
                self._succeed_gradient()
                return True
            raise _Done(PRECISION_FAILURE, "noise coefficient above kappa_mu in every format")

    def _candidate(self) -> Optional[TaggedVector]:
        """Step 3a; None means the candidate overflowed in the finest format."""
        while True:
            try:
                c, stalled = compute_candidate(self.x, self.s, self.F(self.pi_c))
            except FpOverflow:
                if self.pi_c < self.pi_g:
                    self.pi_c += 1
                    continue
                if self.pi_g < self.top:
                    self._drop_gradient()
                    raise _Restart()
                return None
            if stalled:
                if self.pi_c < self.pi_g:
                    self.pi_c += 1
                    self._flag("raise_c")
                    continue
                if self.pi_g < self.top:
                    self._drop_gradient()
                    raise _Restart()
                raise _Done(STALLED, "candidate equals the current point")
            return c

    def _u_rho(self, *fmts):
        return min(self.u(f) for f in fmts)

    def _objective_at_x(self):
        """Step 3b: make the error at the current point small enough."""
        cfg = self.cfg
        bound = dr(cfg.eta0) * dr(self.dT.value)
        fmt_g = self.F(self.pi_g)
        corr = cfg.rho_correction
        while True:
            fx = self.fx
            extra = gamma_rho(self._u_rho(fx.fmt, fmt_g)) * abs(dr(fx.value.value)) if corr else ZERO
            if fx.omega + extra <= bound:
                if self.fx_pending:
                    self.counters.succeed("obj", fx.fmt.name)
                    self.fx_pending = False
                return
            self.fx_pending = False
            if fx.fmt.index >= self.top:
                if self.relaxed:
                    return
                raise _Done(PRECISION_FAILURE, "objective error at the current point too large")
            self._flag("reeval_x")

            def extra_fn(fmt, fx=fx):
                return gamma_rho(self._u_rho(fmt, fmt_g)) * abs(dr(fx.value.value)) if corr else ZERO

            fmt = select_objective_precision(self.stack, fx.fmt.index + 1, fx.omega, self.u(fx.fmt),
                                             cfg.eta0, self.dT.value, None, extra_fn)
            while True:
                res = self._obj(self.x, fmt)
                if res is not None:
                    break
                if fmt.index >= self.top:
                    raise _Done(STALLED, "objective evaluation failed at the current point")
                fmt = self.F(fmt.index + 1)
            self.fx = res
            self.fx_pending = True

    def _objective_at_c(self, c: TaggedVector):
        """Step 3c; returns the accepted evaluation or None when it overflowed."""
        cfg = self.cfg
        bound = dr(cfg.eta0) * dr(self.dT.value)
        fmt_g = self.F(self.pi_g)
        fx = self.fx
        corr = cfg.rho_correction
        f_pred = abs(dr(fx.value.value) - dr(self.dT.value))

        def extra_fn(fmt):
            return gamma_rho(self._u_rho(fmt, fx.fmt, fmt_g)) * f_pred if corr else ZERO

        fmt = select_objective_precision(self.stack, max(self.pi_c, c.fmt.index), fx.omega, self.u(fx.fmt),
                                         cfg.eta0, self.dT.value, fx.value.value, extra_fn)
        while True:
            res = self._obj(c, fmt)
            if res is None:
                if fmt.index >= self.top:
                    return None
                fmt = self.F(fmt.index + 1)
                self._flag("raise_f")
                continue
            extra = gamma_rho(self._u_rho(fmt, fx.fmt, fmt_g)) * abs(dr(res.value.value)) if corr else ZERO
            if res.omega + extra <= bound:
                self.counters.succeed("obj", fmt.name)
                return res
            if fmt.index >= self.top:
                if self.relaxed:
                    return res
                raise _Done(PRECISION_FAILURE, "objective error at the candidate too large")
            fmt = self.F(fmt.index + 1)
            self._flag("raise_f")

    # -- main loop ----------------------------------------------------------

    def run(self) -> RunReport:
        p, cfg = self.p, self.cfg
        try:
            fmt0 = lowest_exact_format(p.x0, self.stack)
            self.x = TaggedVector(p.x0, fmt0)
        except ValueError:
            fmt0 = self.stack[-1]
            self.x = cast(TaggedVector(p.x0, DOUBLE), fmt0)
        self.pi_x = fmt0.index
        self.iterates = [self.x.tolist()] if cfg.record_iterates else []
        self.pi_c = self.pi_x
        self.pi_g = self.pi_x
        self.sigma = Fraction(cfg.sigma0)
        self.g = None
        self.g_pending = False
        self.norm_x = None
        self.gnorm = float("nan")
        self.k = 0
        self.successful = 0
        self.flags: list[str] = []
        status, message = MAX_ITER, ""
        self.fx = None
        for idx in range(self.pi_x, self.top + 1):
            self.fx = self._obj(self.x, self.F(idx))
            if self.fx is not None:
                break
        self.fx_pending = True
        if self.fx is None:
            return self._report(STALLED, "objective evaluation failed at the start point")
        if self.checking and p.L_hint is not None:
            self.smax = inv.sigma_max(cfg, p.L_hint, self.ctx, self.stack)
        try:
            while True:
                if self.k >= cfg.max_iter:
                    raise _Done(MAX_ITER)
                self.flags = []
                self._iteration()
        except _Done as d:
            status, message = d.status, d.message
        if status == FIRST_ORDER and self.fx_pending:
            self.counters.succeed("obj", self.fx.fmt.name)
            self.fx_pending = False
        if self.checking:
            self._post_checks(status)
        return self._report(status, message)

    def _iteration(self):
        cfg = self.cfg
        sigma_k = self.sigma
        while True:
            try:
                self._gradient()
                c = self._candidate()
                break
            except _Restart:
                continue
        fplus = None
        fmt_f = None
        if c is not None:
            self._objective_at_x()
            res = self._objective_at_c(c)
            if res is not None:
                fplus = res
                fmt_f = res.fmt
        rho_fmt = None
        if cfg.rho_correction and fplus is not None:
            fmts = [fmt_f, self.fx.fmt, self.F(self.pi_g)]
            rho_fmt = max(fmts, key=lambda f: f.precision)
        rho, accepted = rho_and_accept(self.fx.value, fplus.value if fplus else None, self.dT, cfg, rho_fmt)
        if self.checking:
            self._iteration_checks(rho, accepted, c, sigma_k)
        rec = dict(k=self.k, pi_x=self.pi_x, pi_g=self.pi_g, pi_c=self.pi_c,
                   pi_f=fmt_f.index if fmt_f else None, sigma=sigma_k, gnorm=self.gnorm,
                   dT=self.dT.value, mu=self.mu, rho=rho, accepted=bool(accepted), flags=list(self.flags))
        if accepted:
            self.x = c
            self.norm_x = None
            self.fx = fplus
            self.fx_pending = False
            self.pi_x = c.fmt.index
            self.pi_c = max(1, fmt_f.index - 1)
            self.pi_g = max(self.pi_c, self.pi_x)
            self.g = None
            self.successful += 1
            if cfg.record_iterates:
                self.iterates.append(c.tolist())
        try:
            self.sigma = update_sigma(self.sigma, rho, cfg)
        except SigmaOverflow as exc:
            if cfg.trace:
                self.trace.append(trace_record(**rec))
            self.k += 1
            raise _Done(STALLED, str(exc))
        if cfg.trace:
            self.trace.append(trace_record(**rec))
        self.k += 1

    # -- invariant checks ---------------------------------------------------

    def _iteration_checks(self, rho, accepted, c, sigma_k):
        p, cfg = self.p, self.cfg
        if p.L_hint is not None:
            alpha = self.ctx.at(self.F(self.pi_g)).alpha_n1
            msg = inv.check_very_successful(cfg, p.L_hint, sigma_k, alpha, self.lam, rho)
            if msg:
                self.violations.append(f"k={self.k}: {msg}")
            msg = inv.check_sigma(sigma_k, self.smax, cfg.sigma0)
            if msg:
                self.violations.append(f"k={self.k}: {msg}")
        if accepted:
            msg = inv.check_true_decrease(cfg, p, self.x.tolist(), c.tolist(), self.dT.value)
            if msg:
                self.violations.append(f"k={self.k}: {msg}")

    def _post_checks(self, status):
        p, cfg = self.p, self.cfg
        if status == FIRST_ORDER:
            msg = inv.check_first_order(cfg, p, self.x.tolist())
            if msg:
                self.violations.append(f"exit: {msg}")
        if p.L_hint is not None:
            msg = inv.check_sigma(self.sigma, self.smax, cfg.sigma0)
            if msg:
                self.violations.append(f"exit: {msg}")
        if p.L_hint is not None and p.f_low is not None:
            f0 = exact_eval(p, p.x0)
            f0 = f0.hi if hasattr(f0, "hi") else f0
            bound = inv.successful_iteration_bound(cfg, p, self.ctx, self.stack, f0)
            self.extras_bound = bound
            if bound is not None and dr(self.successful) > bound:
                self.violations.append(f"successful iterations {self.successful} exceed bound {float(bound):.6g}")

    def _report(self, status, message) -> RunReport:
        extras = {}
        if getattr(self, "extras_bound", None) is not None:
            extras["successful_bound"] = float(self.extras_bound) if self.extras_bound != INF else "inf"
        return RunReport(
            problem=self.p.name, n=self.p.n, solver=self.label, status=status, iterations=self.k,
            successful=self.successful, x=self.x.tolist(), x_format=self.x.fmt.name,
            f=self.fx.value.value if self.fx is not None else float("nan"), gnorm=self.gnorm,
            counters=self.counters, trace=self.trace, violations=self.violations, message=message,
            extras=extras, iterates=self.iterates,
        )


def run_mpr2(problem: Problem, cfg: SolverConfig | None = None) -> RunReport:
    """Run the multi-precision solver; statuses are returned, not raised."""
    cfg = cfg or SolverConfig()
    return MPR2Run(problem, cfg).run()


__all__ = ["run_mpr2", "MPR2Run"]
