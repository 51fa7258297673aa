from fractions import Fraction

import numpy as np
import pytest

from mpr2.defined import ZERO, dr, to_fraction
from mpr2.errors import ForbiddenEvaluation, ZeroGradientBound
from mpr2.evalmodel import (
    GUARANTEED,
    NONE,
    RELAXED,
    eval_gradient,
    eval_objective,
    interval_extension,
)
from mpr2.fpenv import DOUBLE, HALF, SINGLE, TaggedVector, round_fraction
from mpr2.problems import Enclosure, exact_eval, exact_grad, get_problem

from oracles import norm_sq

FORMATS = (HALF, SINGLE, DOUBLE)
PROBLEMS = [("rosenbrock", 2), ("beale", 2), ("pseudo_huber", 3), ("zakharov", 3), ("woods", 4)]


def _points(p, fmt, count, seed):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        vals = [round_fraction(Fraction(v), fmt) for v in rng.uniform(-1.5, 1.5, p.n)]
        yield TaggedVector(vals, fmt)


def _dist(a, b):
    """Largest distance from ``a`` to the exact value or its enclosure."""
    if isinstance(b, Enclosure):
        return max(abs(a - b.lo), abs(a - b.hi))
    return abs(a - b)


@pytest.mark.parametrize("name,n", PROBLEMS)
@pytest.mark.parametrize("fmt", FORMATS, ids=lambda f: f.name)
def test_guaranteed_objective_bound_holds(name, n, fmt):
    p = get_problem(name, n)
    for x in _points(p, fmt, 40, 3):
        r = eval_objective(p, x, fmt, GUARANTEED)
        exact = exact_eval(p, x.tolist())
        lo, hi = r.enclosure.lo, r.enclosure.hi
        if isinstance(exact, Fraction):
            assert Fraction(lo) <= exact <= Fraction(hi)
            assert abs(Fraction(r.value.value) - exact) <= to_fraction(r.omega)
        else:
            assert Fraction(lo) <= exact.lo and exact.hi <= Fraction(hi)


@pytest.mark.parametrize("name,n", PROBLEMS)
@pytest.mark.parametrize("fmt", FORMATS, ids=lambda f: f.name)
def test_guaranteed_gradient_bound_holds(name, n, fmt):
    p = get_problem(name, n)
    for x in _points(p, fmt, 40, 5):
        try:
            r = eval_gradient(p, x, fmt, GUARANTEED)
        except ZeroGradientBound:
            continue
        g = exact_grad(p, x.tolist())
        ghat = [Fraction(v) for v in r.value.tolist()]
        err2 = sum(_dist(a, b) ** 2 for a, b in zip(ghat, g))
        # ||g_hat - g|| <= omega_g ||g_hat||, compared through squares
        bound = to_fraction(r.omega)
        assert err2 <= bound**2 * norm_sq(ghat) * (1 + Fraction(1, 2**60))


def test_relaxed_formulas():
    p = get_problem("booth", 2)
    x = TaggedVector([0.5, 0.25], SINGLE)
    r = eval_objective(p, x, SINGLE, RELAXED)
    allowance = dr(p.expr.size) * dr(SINGLE.min_subnormal)
    assert r.omega == abs(dr(r.value.value)) * 2 * SINGLE.u + allowance
    g = eval_gradient(p, x, SINGLE, RELAXED)
    assert float(g.omega) == pytest.approx(2 * float(SINGLE.u), rel=1e-6)
    assert g.omega > 2 * SINGLE.u


def test_relaxed_zero_gradient_raises_with_allowance():
    p = get_problem("booth", 2)
    x = TaggedVector([1.0, 3.0], HALF)
    with pytest.raises(ZeroGradientBound) as info:
        eval_gradient(p, x, HALF, RELAXED)
    assert info.value.radius > 0


def test_none_mode_has_zero_bounds():
    p = get_problem("rosenbrock", 2)
    x = TaggedVector(list(p.x0), HALF)
    assert eval_objective(p, x, DOUBLE, NONE).omega == ZERO
    assert eval_gradient(p, x, DOUBLE, NONE).omega == ZERO


def test_exact_zero_gradient_at_minimizer_gives_zero_bound():
    p = get_problem("sphere", 3)
    x = TaggedVector([0.0, 0.0, 0.0], HALF)
    r = eval_gradient(p, x, HALF, GUARANTEED)
    assert r.omega == ZERO and r.value.tolist() == [0.0, 0.0, 0.0]


def test_evaluating_below_storage_format_is_forbidden():
    p = get_problem("sphere", 2)
    x = TaggedVector([1.0, 2.0**-20], SINGLE)
    with pytest.raises(ForbiddenEvaluation):
        eval_objective(p, x, HALF)
    with pytest.raises(ForbiddenEvaluation):
        eval_gradient(p, x, HALF, RELAXED)
    eval_objective(p, x, DOUBLE)


def test_unknown_mode_rejected():
    p = get_problem("sphere", 2)
    with pytest.raises(ValueError):
        eval_objective(p, TaggedVector([1.0, 1.0], HALF), HALF, "approximate")


def test_interval_extension_contains_value():
    p = get_problem("sphere", 2)
    x = TaggedVector([3.0, 4.0], HALF)
    iv = interval_extension(p, x, HALF)
    assert iv.lo <= 12.5 <= iv.hi and iv.fmt == HALF


def test_results_carry_formats():
    p = get_problem("rosenbrock", 2)
    x = TaggedVector(list(p.x0), HALF)
    for fmt in FORMATS:
        r = eval_objective(p, x, fmt)
        assert r.fmt == fmt and r.value.fmt == fmt
        assert eval_gradient(p, x, fmt).value.fmt == fmt
