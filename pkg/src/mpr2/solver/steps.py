"""Single-step building blocks of the multi-precision method."""

from __future__ import annotations

from fractions import Fraction
from typing import Optional, Sequence

from ..defined import INF, ZERO, dr
from ..errbounds import gamma_rho
from ..errors import PrecisionFailure, SigmaOverflow
from ..fpenv import (
    DOUBLE,
    FpFormat,
    TaggedValue,
    TaggedVector,
    cast,
    fp_dot,
    fp_op,
    vec_op,
    vec_scalar,
)
from .config import SolverConfig


def sigma_fits(sigma: Fraction, fmt: FpFormat) -> bool:
    """True when the power of two ``sigma`` is a normal number of ``fmt``."""
    return fmt.min_normal <= sigma <= fmt.max_finite


def compute_step(g: TaggedVector, sigma: Fraction) -> TaggedVector:
    """``fl(-g / sigma)`` in the gradient's format (``sigma`` a power of two)."""
    s = vec_scalar(g, float(sigma), "/")
    return TaggedVector(-s.values, s.fmt, s.underflow)


def model_decrease(g: TaggedVector, s: TaggedVector) -> TaggedValue:
    """Computed Taylor-model decrease ``-fl(g . s)``."""
    d = fp_dot(g, s)
    return TaggedValue(-d.value + 0.0, d.fmt, d.underflow)


def compute_candidate(x: TaggedVector, s: TaggedVector, fmt_c: FpFormat) -> tuple[TaggedVector, bool]:
    """``fl(x + s)`` in the step's format, cast to ``fmt_c``.

    The flag is True when the candidate equals ``x`` componentwise (the step
    was absorbed by rounding).
    """
    c = vec_op(x, s, "+")
    c = cast(c, fmt_c)
    stalled = bool((c.values == x.values).all())
    return c, stalled


def stopping_threshold(eps, omega_g, beta):
    return dr(eps) / ((1 + dr(beta)) * (1 + dr(omega_g)))


def stop_test(gnorm: TaggedValue, eps, omega_g, beta, relaxed: bool = False) -> bool:
    if relaxed:
        return dr(gnorm.value) <= dr(eps)
    return dr(gnorm.value) <= stopping_threshold(eps, omega_g, beta)


def select_gradient_precision(pi_g: int, pi_c: int, top: int) -> tuple[int, int]:
    """Next (pi_g, pi_c) after a failed noise test.

    The candidate format is raised first while it is below the gradient
    format; otherwise the gradient format is raised.  Raises
    PrecisionFailure when both already sit at the top of the stack.
    """
    if pi_c < pi_g:
        return pi_g, pi_c + 1
    if pi_g < top:
        return pi_g + 1, pi_c
    raise PrecisionFailure("no format left for the gradient")


def predicted_omega(omega_ref, u_ref, u_new, f_ref: Optional[float] = None, dT: Optional[float] = None):
    """Scale a known objective error bound to another format.

    With ``f_ref`` and ``dT`` the bound is also scaled by the expected
    relative change of the objective, ``|f - dT| / |f|``; a zero ``f_ref``
    falls back to the plain unit-roundoff ratio.
    """
    if dr(omega_ref) == 0:
        return ZERO
    w = dr(omega_ref) * dr(u_new) / dr(u_ref)
    if f_ref is not None and dT is not None and f_ref != 0.0:
        w = w * abs(dr(f_ref) - dr(dT)) / abs(dr(f_ref))
    return w


def select_objective_precision(stack: Sequence[FpFormat], lowest: int, omega_ref, u_ref, eta0, dT,
                               f_ref: Optional[float] = None, extra=None) -> FpFormat:
    """Least format with index >= ``lowest`` whose predicted error passes.

    ``extra(fmt)`` adds a format-dependent term (the rounding correction of
    the acceptance ratio).  Returns the top format when none passes.
    """
    bound = dr(eta0) * dr(dT)
    for fmt in stack[lowest - 1:]:
        w = predicted_omega(omega_ref, u_ref, fmt.u, f_ref, dT)
        if extra is not None:
            w = w + extra(fmt)
        if w <= bound:
            return fmt
    return stack[-1]


def rho_correction_term(u_rho, f_value: float):
    return gamma_rho(u_rho) * abs(dr(f_value))


def rho_and_accept(f_k: TaggedValue, f_plus: Optional[TaggedValue], dT: TaggedValue, cfg: SolverConfig,
                   rho_format: Optional[FpFormat] = None):
    """Acceptance ratio and decision.

    ``rho`` is a DefinedReal unless ``rho_format`` is given, in which case it
    is computed in that format.  An overflowing candidate (``f_plus`` None)
    gives ``rho = -inf``.
    """
    if f_plus is None:
        return -INF, False
    if rho_format is None:
        rho = (dr(f_k.value) - dr(f_plus.value)) / dr(dT.value)
    else:
        a = TaggedValue(f_k.value, rho_format)
        b = TaggedValue(f_plus.value, rho_format)
        num = fp_op(a, b, "-")
        rho = dr(fp_op(num, TaggedValue(dT.value, rho_format), "/").value)
    return rho, rho >= dr(cfg.eta1)


def update_sigma(sigma: Fraction, rho, cfg: SolverConfig) -> Fraction:
    rho = dr(rho)
    if rho >= dr(cfg.eta2):
        new = max(cfg.sigma_min, cfg.gamma1 * sigma)
    elif rho >= dr(cfg.eta1):
        new = sigma
    else:
        new = cfg.gamma3 * sigma
    if new > DOUBLE.max_finite:
        raise SigmaOverflow(f"sigma = 2^{new.numerator.bit_length() - 1} exceeds the largest double")
    return new


__all__ = [
    "compute_step", "model_decrease", "compute_candidate", "stopping_threshold", "stop_test",
    "select_gradient_precision", "select_objective_precision", "predicted_omega", "rho_and_accept",
    "update_sigma", "sigma_fits", "rho_correction_term",
]
