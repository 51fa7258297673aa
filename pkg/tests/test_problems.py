from fractions import Fraction

import numpy as np
import pytest

from mpr2.errors import BadDimension, UnknownProblem
from mpr2.expr import IntervalKind
from mpr2.fpenv import DOUBLE, HALF
from mpr2.problems import (
    DEFAULT_SUITE,
    Enclosure,
    default_dimension,
    exact_eval,
    exact_grad,
    get_problem,
    legal_dimensions,
    problem_names,
    upper_abs,
)


def test_registry_size_and_defaults():
    names = problem_names()
    assert len(names) >= 12
    for name in names:
        n = default_dimension(name)
        p = get_problem(name)
        assert p.n == n and len(p.x0) == n
        assert legal_dimensions(name)
    for name, n in DEFAULT_SUITE:
        get_problem(name, n)


def test_starting_points_are_half_representable():
    for name in problem_names():
        p = get_problem(name)
        for v in p.x0:
            assert float(np.float16(v)) == v


def test_rosenbrock_start_and_minimum():
    p = get_problem("rosenbrock", 2)
    assert p.x0 == (-1.2001953125, 1.0)
    assert exact_eval(p, [1, 1]) == 0
    assert exact_grad(p, [1, 1]) == [0, 0]


def test_worked_values():
    assert exact_eval(get_problem("sphere", 2), [3, 4]) == Fraction(25, 2)
    assert exact_eval(get_problem("beale", 2), [3, Fraction(1, 2)]) == 0
    assert exact_eval(get_problem("himmelblau", 2), [3, 2]) == 0
    assert exact_eval(get_problem("booth", 2), [1, 3]) == 0


def test_quadratic_metadata():
    p = get_problem("quadratic", 10)
    assert p.f_low == 0 and p.L_hint == 10
    assert exact_grad(p, p.x_star) == [0] * 10
    assert exact_grad(p, [1] * 10) == list(range(1, 11))


@pytest.mark.parametrize("name", problem_names())
def test_known_minimizers_are_stationary(name):
    p = get_problem(name)
    if p.x_star is None:
        return
    g = exact_grad(p, p.x_star)
    assert all(upper_abs(v) < Fraction(1, 10**60) for v in g)
    if p.f_low is not None:
        f = exact_eval(p, p.x_star)
        f = f.lo if isinstance(f, Enclosure) else f
        assert f >= p.f_low - Fraction(1, 10**60)


def test_trid_lower_bound_is_attained():
    p = get_problem("trid", 6)
    assert exact_eval(p, p.x_star) == p.f_low == -50


def test_irrational_value_is_enclosed():
    v = exact_eval(get_problem("pseudo_huber", 1), [0])
    assert isinstance(v, Enclosure)
    assert (v.lo + 1) ** 2 <= 2 <= (v.hi + 1) ** 2


def test_unknown_and_bad_dimension():
    with pytest.raises(UnknownProblem):
        get_problem("no_such_problem")
    with pytest.raises(BadDimension):
        get_problem("beale", 3)
    with pytest.raises(BadDimension):
        get_problem("quadratic", 0)
    with pytest.raises(BadDimension):
        get_problem("powell_singular", 6)
    with pytest.raises(BadDimension):
        get_problem("quadratic", 2.0)


def test_problems_are_cached_and_frozen():
    p = get_problem("woods")
    assert get_problem("woods", 4) is p
    with pytest.raises(AttributeError):
        p.n = 5


@pytest.mark.parametrize("name", problem_names())
def test_double_evaluation_inside_enclosure(name):
    p = get_problem(name)
    rng = np.random.default_rng(11)
    kind = IntervalKind(DOUBLE)
    for _ in range(20):
        x = [float(np.float16(v)) for v in rng.uniform(-2, 2, p.n)]
        lo, hi = p.expr.value(kind, x)
        exact = exact_eval(p, x)
        if isinstance(exact, Enclosure):
            assert Fraction(lo) <= exact.hi and exact.lo <= Fraction(hi)
        else:
            assert Fraction(lo) <= exact <= Fraction(hi)


def test_half_evaluation_of_start_points():
    for name, n in DEFAULT_SUITE:
        p = get_problem(name, n)
        lo, hi = p.expr.value(IntervalKind(HALF), list(p.x0))
        assert lo <= hi
