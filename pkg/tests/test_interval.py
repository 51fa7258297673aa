import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from mpr2.errors import FpDivisionByZero, FpDomainError, FpOverflow
from mpr2.fpenv import DOUBLE, HALF, SINGLE, round_fraction
from mpr2.interval import Interval, IntervalOps

FORMATS = {"half": HALF, "single": SINGLE, "double": DOUBLE}


def in_format(fmt):
    """Finite values of ``fmt`` in a range where products and quotients stay finite."""
    lim = 200.0 if fmt is HALF else 1e15
    return st.floats(-lim, lim, allow_nan=False).map(lambda v: round_fraction(Fraction(v), fmt))


def directed(exact: Fraction, fmt):
    return round_fraction(exact, fmt, "down"), round_fraction(exact, fmt, "up")


@pytest.mark.parametrize("name", list(FORMATS))
@given(data=st.data())
def test_point_operations_are_tight(name, data):
    fmt = FORMATS[name]
    ops = IntervalOps(fmt)
    a = data.draw(in_format(fmt))
    b = data.draw(in_format(fmt))
    fa, fb = Fraction(a), Fraction(b)
    try:
        assert ops.add((a, a), (b, b)) == directed(fa + fb, fmt)
        assert ops.sub((a, a), (b, b)) == directed(fa - fb, fmt)
        assert ops.mul((a, a), (b, b)) == directed(fa * fb, fmt)
        if b != 0.0:
            assert ops.div((a, a), (b, b)) == directed(fa / fb, fmt)
    except FpOverflow:
        assume(False)
    if a >= 0:
        lo, hi = ops.sqrt((a, a))
        assert Fraction(lo) ** 2 <= fa <= Fraction(hi) ** 2
        assert lo == hi or lo == round_fraction(Fraction(lo), fmt) and hi > lo


@pytest.mark.parametrize("name", ["half", "single", "double"])
def test_random_intervals_contain_exact_results(name):
    fmt = FORMATS[name]
    ops = IntervalOps(fmt)
    rng = np.random.default_rng(17)
    r = 12 if fmt is HALF else 30  # keeps a^4 finite in half
    for _ in range(3000):
        a = sorted(round_fraction(Fraction(v), fmt) for v in rng.uniform(-r, r, 2))
        b = sorted(round_fraction(Fraction(v), fmt) for v in rng.uniform(-r, r, 2))
        pa = Fraction(rng.uniform(0, 1)) * (Fraction(a[1]) - Fraction(a[0])) + Fraction(a[0])
        pb = Fraction(rng.uniform(0, 1)) * (Fraction(b[1]) - Fraction(b[0])) + Fraction(b[0])
        for op, exact in (("add", pa + pb), ("sub", pa - pb), ("mul", pa * pb)):
            lo, hi = getattr(ops, op)(tuple(a), tuple(b))
            assert Fraction(lo) <= exact <= Fraction(hi)
        if not b[0] <= 0.0 <= b[1] and min(abs(b[0]), abs(b[1])) > 0.01:
            lo, hi = ops.div(tuple(a), tuple(b))
            assert Fraction(lo) <= pa / pb <= Fraction(hi)
        for k in (2, 3, 4):
            lo, hi = ops.pow(tuple(a), k)
            assert Fraction(lo) <= pa**k <= Fraction(hi)


def test_pow_even_straddling_zero_starts_at_zero():
    ops = IntervalOps(HALF)
    assert ops.pow((-2.0, 3.0), 2) == (0.0, 9.0)
    assert ops.pow((-3.0, -2.0), 2) == (4.0, 9.0)
    assert ops.pow((-3.0, -2.0), 3) == (-27.0, -8.0)
    assert ops.pow((-1.0, 1.0), 0) == (1.0, 1.0)


def test_constants_are_enclosed():
    ops = IntervalOps(HALF)
    lo, hi = ops.const(Fraction(1, 10))
    assert Fraction(lo) < Fraction(1, 10) < Fraction(hi)
    assert ops.const(Fraction(1, 2)) == (0.5, 0.5)


def test_domain_errors():
    ops = IntervalOps(SINGLE)
    with pytest.raises(FpDivisionByZero):
        ops.div((1.0, 2.0), (-1.0, 1.0))
    with pytest.raises(FpDomainError):
        ops.sqrt((-1.0, 4.0))
    with pytest.raises(FpOverflow):
        IntervalOps(HALF).mul((300.0, 300.0), (300.0, 300.0))


def test_interval_type():
    iv = Interval(1.0, 2.0, HALF)
    assert 1.5 in iv and Fraction(5, 2) not in iv
    assert iv.width == 1.0
    with pytest.raises(ValueError):
        Interval(2.0, 1.0)


def test_double_products_near_underflow_use_exact_fallback():
    ops = IntervalOps(DOUBLE)
    a = 3.0 * 2.0**-540
    lo, hi = ops.mul((a, a), (a, a))
    exact = Fraction(a) ** 2
    assert Fraction(lo) <= exact <= Fraction(hi)
    assert lo == round_fraction(exact, DOUBLE, "down")
    assert not math.isnan(hi)
