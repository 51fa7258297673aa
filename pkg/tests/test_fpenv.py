import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from mpr2.errors import FpDivisionByZero, FpDomainError, FpOverflow
from mpr2.fpenv import (
    DEFAULT_STACK,
    DOUBLE,
    HALF,
    KNOWN_FORMATS,
    SINGLE,
    TaggedValue,
    TaggedVector,
    cast,
    fp_dot,
    fp_norm,
    fp_op,
    fp_sqrt,
    is_representable,
    lowest_exact_format,
    make_stack,
    next_down,
    next_up,
    round_fraction,
    round_to_format,
    vec_op,
    vec_scalar,
)

from oracles import exact_dot, nearest

NP_TYPES = {"half": np.float16, "single": np.float32, "double": np.float64}

finite = st.floats(min_value=-6.0e4, max_value=6.0e4, allow_nan=False, allow_infinity=False)


def test_default_stack_constants():
    assert [f.name for f in DEFAULT_STACK] == ["half", "single", "double"]
    assert [f.index for f in DEFAULT_STACK] == [1, 2, 3]
    assert HALF.u == Fraction(1, 2048)
    assert SINGLE.u_fraction == Fraction(1, 2**24)
    assert DOUBLE.u_fraction == Fraction(1, 2**53)
    for f in DEFAULT_STACK:
        assert f.u == f.eps_machine / 2
    assert HALF.max_finite == 65504.0
    assert SINGLE.max_finite == float(np.finfo(np.float32).max)
    assert HALF.min_subnormal == 2.0**-24
    assert DOUBLE.is_native and not HALF.is_native


def test_stack_must_decrease_unit_roundoff():
    with pytest.raises(ValueError):
        make_stack(["single", "half"])
    with pytest.raises(ValueError):
        make_stack(["half", "bfloat16"])
    with pytest.raises(ValueError):
        make_stack([])
    s = make_stack(["bfloat16", "single"])
    assert [f.index for f in s] == [1, 2]


@pytest.mark.parametrize("name", ["half", "single"])
def test_rounding_matches_numpy(name):
    fmt = KNOWN_FORMATS[name]
    rng = np.random.default_rng(3)
    x = rng.standard_normal(20000) * 10.0 ** rng.integers(-9, 5, 20000)
    with np.errstate(over="ignore"):
        ref = x.astype(NP_TYPES[name]).astype(np.float64)
    for v, r in zip(x.tolist(), ref.tolist()):
        if math.isinf(r):
            with pytest.raises(FpOverflow):
                round_to_format(v, fmt)
        else:
            assert round_to_format(v, fmt).value == r


@pytest.mark.parametrize("name", ["half", "single"])
@pytest.mark.parametrize("op", ["+", "-", "*", "/"])
def test_emulated_ops_match_numpy(name, op):
    fmt = KNOWN_FORMATS[name]
    t = NP_TYPES[name]
    rng = np.random.default_rng(11)
    a = (rng.standard_normal(5000) * 4).astype(t)
    b = (rng.standard_normal(5000) * 4).astype(t)
    b[b == 0] = t(1)
    with np.errstate(over="ignore", under="ignore"):
        ref = {"+": a + b, "-": a - b, "*": a * b, "/": a / b}[op]
    for x, y, r in zip(a.tolist(), b.tolist(), ref.astype(np.float64).tolist()):
        if math.isinf(r):
            continue
        got = fp_op(TaggedValue(x, fmt), TaggedValue(y, fmt), op)
        assert got.value == r and got.fmt == fmt


@given(st.fractions(min_value=-60000, max_value=60000, max_denominator=10**9))
def test_round_fraction_is_nearest_even(q):
    for fmt in (HALF, SINGLE, DOUBLE):
        assert Fraction(round_fraction(q, fmt)) == nearest(q, fmt.precision, fmt.emin)


@given(st.fractions(min_value=-1000, max_value=1000, max_denominator=10**6))
def test_directed_modes_bracket(q):
    for fmt in (HALF, SINGLE):
        lo = Fraction(round_fraction(q, fmt, "down"))
        hi = Fraction(round_fraction(q, fmt, "up"))
        assert lo <= q <= hi
        if lo != hi:
            assert next_up(float(lo), fmt) == float(hi)


def test_relative_rounding_error_bounded_by_u():
    rng = np.random.default_rng(5)
    for fmt in DEFAULT_STACK:
        for v in rng.uniform(-100, 100, 3000).tolist():
            y = round_to_format(Fraction(v) / 3, fmt).value
            exact = Fraction(v) / 3
            assert abs(Fraction(y) - exact) <= fmt.u_fraction * abs(exact)


@pytest.mark.parametrize("name", ["half", "double"])
def test_next_up_down_match_numpy(name):
    fmt = KNOWN_FORMATS[name]
    t = NP_TYPES[name]
    rng = np.random.default_rng(2)
    vals = (rng.standard_normal(3000) * 10.0 ** rng.integers(-6, 4, 3000)).astype(t)
    vals = np.concatenate([vals, np.array([0.0, 2.0**-24, 1.0, 2.0**-14, -1.0], dtype=t)])
    for v in vals.tolist():
        up = float(np.nextafter(t(v), t(np.inf)))
        down = float(np.nextafter(t(v), t(-np.inf)))
        if not math.isinf(up):
            assert next_up(v, fmt) == up
        if not math.isinf(down) and v != 0.0:
            assert next_down(v, fmt) == down


def test_overflow_raises():
    with pytest.raises(FpOverflow):
        fp_op(TaggedValue(60000.0, HALF), TaggedValue(60000.0, HALF), "+")
    with pytest.raises(FpOverflow):
        round_to_format(1e300, SINGLE)
    with pytest.raises(FpDivisionByZero):
        fp_op(TaggedValue(1.0, HALF), TaggedValue(0.0, HALF), "/")
    with pytest.raises(FpDomainError):
        fp_sqrt(TaggedValue(-1.0, SINGLE))


def test_mixed_format_ops_promote():
    a = TaggedValue(1.0, HALF)
    b = TaggedValue(2.0**-20, SINGLE)
    out = fp_op(a, b, "+")
    assert out.fmt == SINGLE and out.value == 1.0 + 2.0**-20
    # the same sum in half absorbs the small term
    assert fp_op(a, TaggedValue(2.0**-20, HALF), "+").value == 1.0


def test_underflow_flag():
    tiny = TaggedValue(2.0**-13, HALF)
    out = fp_op(tiny, tiny, "*")
    assert out.underflow and out.value == 0.0
    assert not fp_op(TaggedValue(0.5, HALF), TaggedValue(0.5, HALF), "*").underflow


def test_tagged_vector_is_read_only():
    v = TaggedVector([1.0, 2.0], HALF)
    with pytest.raises(ValueError):
        v.values[0] = 3.0
    with pytest.raises(ValueError):
        TaggedVector.exact([0.1], HALF)
    assert TaggedVector.exact([0.5, -2.0], HALF).tolist() == [0.5, -2.0]


def test_cast_up_is_exact_down_rounds():
    v = TaggedVector([0.1, 1.0 / 3.0], DOUBLE)
    h = cast(v, HALF)
    assert h.fmt == HALF
    assert h.tolist() == [float(np.float16(0.1)), float(np.float16(1 / 3))]
    back = cast(h, DOUBLE)
    assert back.tolist() == h.tolist() and back.fmt == DOUBLE
    with pytest.raises(FpOverflow):
        cast(TaggedVector([1e6], DOUBLE), HALF)


def test_vec_ops():
    x = TaggedVector([1.0, 2.0], HALF)
    y = TaggedVector([2.0**-12, 3.0], SINGLE)
    s = vec_op(x, y, "+")
    assert s.fmt == SINGLE and s.tolist() == [1.0 + 2.0**-12, 5.0]
    assert vec_scalar(x, 4.0, "/").tolist() == [0.25, 0.5]
    with pytest.raises(ValueError):
        vec_op(x, TaggedVector([1.0], HALF), "+")


def test_dot_is_sequential_left_to_right():
    # 2048 + 1 + 1 in half: each +1 is absorbed (ties to even), pairwise would give 2050
    x = TaggedVector([2048.0, 1.0, 1.0], HALF)
    ones = TaggedVector([1.0, 1.0, 1.0], HALF)
    assert fp_dot(x, ones).value == 2048.0
    x = TaggedVector([1.0, 1.0, 2048.0], HALF)
    assert fp_dot(x, ones).value == 2050.0


@given(st.lists(finite, min_size=1, max_size=12))
def test_dot_in_double_close_to_exact(vals):
    v = TaggedVector(vals, DOUBLE)
    d = fp_dot(v, v)
    assume(not d.underflow)  # the bound does not cover gradual underflow
    exact = exact_dot(vals, vals)
    n = len(vals)
    assert abs(Fraction(d.value) - exact) <= n * DOUBLE.u_fraction * exact


def test_norm_examples():
    assert fp_norm(TaggedVector([3.0, 4.0], HALF)).value == 5.0
    assert fp_norm(TaggedVector([], HALF)).value == 0.0
    with pytest.raises(FpOverflow):
        fp_norm(TaggedVector([300.0, 300.0], HALF))


def test_lowest_exact_format():
    assert lowest_exact_format([1.0, -0.5], DEFAULT_STACK) == DEFAULT_STACK[0]
    assert lowest_exact_format([1.0 + 2.0**-20], DEFAULT_STACK).name == "single"
    assert lowest_exact_format([0.1], DEFAULT_STACK).name == "double"
    assert not is_representable(1e6, HALF)
    assert is_representable(65504.0, HALF)
