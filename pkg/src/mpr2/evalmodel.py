"""Objective and gradient evaluation with error bounds.

Three error models are available:

``guaranteed``
    the rounded value plus an outward-rounded interval evaluation of the same
    expression; ``omega_f`` is the largest distance from the computed value to
    an interval endpoint and ``omega_g`` is the Euclidean norm of the
    componentwise radii divided by the norm of the computed gradient.
``relaxed``
    ``omega_f = 2u|f|`` and ``omega_g = 2u``, plus an absolute allowance of
    one smallest subnormal per operation so that results computed among
    subnormals are not trusted at full relative accuracy.
``none``
    all error bounds are zero (exact-arithmetic bookkeeping).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Any

from . import defined
from .defined import ZERO, dr
from .errors import ForbiddenEvaluation, ZeroGradientBound
from .expr import IntervalKind, RoundedKind
from .fpenv import FpFormat, TaggedValue, TaggedVector
from .interval import Interval

GUARANTEED, RELAXED, NONE = "guaranteed", "relaxed", "none"
MODES = (GUARANTEED, RELAXED, NONE)


@dataclass(frozen=True)
class EvalResult:
    """``value`` is a TaggedValue (objective) or TaggedVector (gradient)."""

    value: Any
    omega: Any
    fmt: FpFormat
    enclosure: Any = None


@lru_cache(maxsize=None)
def _rounded(fmt: FpFormat) -> RoundedKind:
    return RoundedKind(fmt)


@lru_cache(maxsize=None)
def _interval(fmt: FpFormat) -> IntervalKind:
    return IntervalKind(fmt)


def _check(x: TaggedVector, fmt: FpFormat, mode: str):
    if mode not in MODES:
        raise ValueError(f"unknown error mode {mode!r}")
    if fmt.precision < x.fmt.precision:
        raise ForbiddenEvaluation(f"point stored in {x.fmt.name} cannot be evaluated in {fmt.name}")


def _expr(p):
    return getattr(p, "expr", p)


def _radius(value: float, lo: float, hi: float):
    v = dr(value)
    return max(v - dr(lo), dr(hi) - v)


def _underflow_allowance(e, fmt: FpFormat):
    return dr(e.size) * dr(fmt.min_subnormal)


def interval_extension(p, x: TaggedVector, fmt: FpFormat) -> Interval:
    """Outward-rounded enclosure of the objective at the exact point ``x``."""
    _check(x, fmt, GUARANTEED)
    lo, hi = _expr(p).value(_interval(fmt), x.tolist())
    return Interval(lo, hi, fmt)


def eval_objective(p, x: TaggedVector, fmt: FpFormat, mode: str = GUARANTEED) -> EvalResult:
    _check(x, fmt, mode)
    e = _expr(p)
    f = e.value(_rounded(fmt), x.tolist())
    fv = TaggedValue(f, fmt)
    if mode == RELAXED:
        return EvalResult(fv, abs(dr(f)) * 2 * fmt.u + _underflow_allowance(e, fmt), fmt)
    if mode == NONE:
        return EvalResult(fv, ZERO, fmt)
    lo, hi = e.value(_interval(fmt), x.tolist())
    return EvalResult(fv, _radius(f, lo, hi), fmt, Interval(lo, hi, fmt))


def eval_gradient(p, x: TaggedVector, fmt: FpFormat, mode: str = GUARANTEED) -> EvalResult:
    """Forward-mode gradient rounded in ``fmt`` with its relative error bound.

    In guaranteed mode a zero computed gradient with a nonzero enclosure
    radius raises :class:`ZeroGradientBound` carrying the absolute radius.
    """
    _check(x, fmt, mode)
    e = _expr(p)
    _, g = e.value_and_grad(_rounded(fmt), x.tolist())
    gv = TaggedVector(g, fmt)
    if mode == RELAXED:
        slack = _underflow_allowance(e, fmt) * defined.sqrt(dr(len(g)))
        g2 = sum((dr(v) ** 2 for v in g), ZERO)
        if g2 == 0:
            raise ZeroGradientBound(slack)
        return EvalResult(gv, 2 * fmt.u + slack / defined.sqrt(g2), fmt)
    if mode == NONE:
        return EvalResult(gv, ZERO, fmt)
    _, gi = e.value_and_grad(_interval(fmt), x.tolist())
    r2 = ZERO
    g2 = ZERO
    for gk, (lo, hi) in zip(g, gi):
        r = _radius(gk, lo, hi)
        r2 += r * r
        g2 += dr(gk) ** 2
    radius = defined.sqrt(r2)
    if g2 == 0:
        if radius == 0:
            return EvalResult(gv, ZERO, fmt, gi)
        raise ZeroGradientBound(radius)
    return EvalResult(gv, radius / defined.sqrt(g2), fmt, gi)


__all__ = ["EvalResult", "Interval", "eval_objective", "eval_gradient", "interval_extension",
           "GUARANTEED", "RELAXED", "NONE", "MODES"]
