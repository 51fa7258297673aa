"""Emulated IEEE-754 binary formats with round-to-nearest-even arithmetic.

Half and single precision are emulated: each elementary operation runs in
native double precision and the result is rounded once to the target format.
Double precision carries at least ``2p + 2`` significand bits for both emulated
formats, so this double rounding is innocuous for ``+ - * /`` and ``sqrt``.

Formats in a stack are indexed from 1 (lowest precision) upward.  Mixed-format
operations implicitly promote operands to the higher-indexed format.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Iterable, Sequence

import numpy as np

from . import defined
from .errors import FpDivisionByZero, FpDomainError, FpOverflow

NEAREST, UP, DOWN = "nearest", "up", "down"


@dataclass(frozen=True)
class FpFormat:
    """A binary floating-point format.

    ``precision`` counts significand bits including the hidden bit; ``emin`` and
    ``emax`` are the exponents of the smallest and largest normal binades.
    ``index`` is the position in the active format stack (1 = least precise).
    """

    name: str
    precision: int
    emin: int
    emax: int
    bits: int
    index: int = 1

    @property
    def u(self):
        """Unit roundoff ``2**-p`` as a DefinedReal."""
        return defined.dr(Fraction(1, 2**self.precision))

    @property
    def u_fraction(self) -> Fraction:
        return Fraction(1, 2**self.precision)

    @property
    def eps_machine(self):
        return defined.dr(Fraction(2, 2**self.precision))

    @property
    def max_finite(self) -> float:
        return math.ldexp(2.0 - math.ldexp(1.0, 1 - self.precision), self.emax)

    @property
    def min_normal(self) -> float:
        return math.ldexp(1.0, self.emin)

    @property
    def min_subnormal(self) -> float:
        return math.ldexp(1.0, self.emin - self.precision + 1)

    @property
    def is_native(self) -> bool:
        """True when Python floats already carry this format exactly."""
        return (self.precision, self.emin, self.emax) == (53, -1022, 1023)

    def __str__(self):
        return self.name


HALF = FpFormat("half", 11, -14, 15, 16, index=1)
SINGLE = FpFormat("single", 24, -126, 127, 32, index=2)
DOUBLE = FpFormat("double", 53, -1022, 1023, 64, index=3)

KNOWN_FORMATS = {
    "half": HALF,
    "float16": HALF,
    "single": SINGLE,
    "float32": SINGLE,
    "double": DOUBLE,
    "float64": DOUBLE,
    "bfloat16": FpFormat("bfloat16", 8, -126, 127, 16),
}


def make_stack(formats: Iterable[FpFormat | str]) -> tuple[FpFormat, ...]:
    """Build an ordered stack, re-indexing the formats from 1.

    Raises ``ValueError`` unless unit roundoffs strictly decrease along the stack.
    """
    fmts = [KNOWN_FORMATS[f.lower()] if isinstance(f, str) else f for f in formats]
    if not fmts:
        raise ValueError("empty format stack")
    for lo, hi in zip(fmts, fmts[1:]):
        if hi.precision <= lo.precision:
            raise ValueError(f"stack not ordered by decreasing unit roundoff: {lo.name} before {hi.name}")
    if any(f.precision > 53 for f in fmts):
        raise ValueError("formats wider than double precision cannot be emulated")
    return tuple(replace(f, index=i + 1) for i, f in enumerate(fmts))


DEFAULT_STACK = make_stack([HALF, SINGLE, DOUBLE])


def higher(a: FpFormat, b: FpFormat) -> FpFormat:
    return a if a.index >= b.index else b


# ---------------------------------------------------------------------------
# scalar rounding kernels


@lru_cache(maxsize=None)
def rounder(precision: int, emin: int, emax: int, mode: str = NEAREST) -> Callable[[float], float]:
    """Return ``f(x)`` rounding a double to the given format.

    Raises ``FpOverflow`` when the rounded magnitude exceeds the largest finite
    value.  Doubles reach here only from exact values or single roundings, so
    rounding them once more is exact single rounding (see module docstring).
    """
    maxf = math.ldexp(2.0 - math.ldexp(1.0, 1 - precision), emax)
    frexp, ldexp, isfinite, copysign = math.frexp, math.ldexp, math.isfinite, math.copysign

    if (precision, emin, emax) == (53, -1022, 1023):

        def round_native(x):
            if not isfinite(x):
                raise FpOverflow(f"{x} is not finite in double")
            return x

        return round_native

    top = emin - precision + 1
    if mode == NEAREST:
        integer = round
    elif mode == UP:
        integer = math.ceil
    elif mode == DOWN:
        integer = math.floor
    else:
        raise ValueError(f"unknown rounding mode {mode!r}")

    def round_emulated(x):
        if x == 0.0:
            return x
        if not isfinite(x):
            raise FpOverflow(f"{x} is not finite")
        e = frexp(x)[1] - precision
        q = e if e > top else top
        y = ldexp(integer(ldexp(x, -q)), q)
        if y > maxf or y < -maxf:
            raise FpOverflow(f"{x!r} overflows a {precision}-bit format (max {maxf})")
        return y if y != 0.0 else copysign(0.0, x)

    return round_emulated


def _rounder_for(fmt: FpFormat, mode: str = NEAREST):
    return rounder(fmt.precision, fmt.emin, fmt.emax, mode)


def round_fraction(x: Fraction, fmt: FpFormat, mode: str = NEAREST) -> float:
    """Round an exact rational to ``fmt`` with a single rounding."""
    x = Fraction(x)
    if x == 0:
        return 0.0
    num, den = abs(x.numerator), x.denominator
    # exponent e with 2**e <= |x| < 2**(e+1)
    e = num.bit_length() - den.bit_length()
    if Fraction(num, den) < Fraction(2) ** e:
        e -= 1
    q = max(e, fmt.emin) - fmt.precision + 1
    scaled = Fraction(num, den) / Fraction(2) ** q
    fl, rem = divmod(scaled.numerator, scaled.denominator)
    neg = x < 0
    if rem:
        if mode == NEAREST:
            twice = 2 * rem
            if twice > scaled.denominator or (twice == scaled.denominator and fl % 2 == 1):
                fl += 1
        elif (mode == UP and not neg) or (mode == DOWN and neg):
            fl += 1
    value = Fraction(fl) * Fraction(2) ** q
    if value > Fraction(fmt.max_finite):
        raise FpOverflow(f"{float(x)!r} overflows {fmt.name}")
    out = float(value)
    return -out if neg else out


def _spacing_above(x: float, fmt: FpFormat) -> float:
    """Gap between ``x >= 0`` and the next larger value of ``fmt``."""
    if x == 0.0:
        return fmt.min_subnormal
    e = math.frexp(x)[1] - 1
    return math.ldexp(1.0, max(e, fmt.emin) - fmt.precision + 1)


def _spacing_below(x: float, fmt: FpFormat) -> float:
    """Gap between ``x > 0`` and the next smaller value of ``fmt``."""
    m, e = math.frexp(x)
    if m == 0.5 and e - 1 > fmt.emin:
        return math.ldexp(1.0, e - 1 - fmt.precision)
    return _spacing_above(x, fmt)


def next_up(y: float, fmt: FpFormat) -> float:
    """Smallest value of ``fmt`` strictly greater than ``y`` (``y`` in ``fmt``)."""
    if y >= 0.0:
        r = y + _spacing_above(y, fmt)
        if r > fmt.max_finite:
            raise FpOverflow(f"no finite {fmt.name} value above {y!r}")
        return r
    return -(-y - _spacing_below(-y, fmt))


def next_down(y: float, fmt: FpFormat) -> float:
    return -next_up(-y, fmt)


def is_representable(x: float, fmt: FpFormat) -> bool:
    try:
        return _rounder_for(fmt)(x) == x
    except FpOverflow:
        return False


def _is_tiny(y: float, fmt: FpFormat) -> bool:
    return abs(y) < fmt.min_normal


# ---------------------------------------------------------------------------
# tagged values


@dataclass(frozen=True)
class TaggedValue:
    """A floating-point number together with the format it belongs to."""

    value: float
    fmt: FpFormat
    underflow: bool = False

    def __float__(self):
        return self.value

    def __repr__(self):
        return f"{self.value!r}@{self.fmt.name}"


@dataclass(frozen=True, eq=False)
class TaggedVector:
    """A vector of values exactly representable in ``fmt``."""

    values: np.ndarray
    fmt: FpFormat
    underflow: bool = field(default=False)

    def __post_init__(self):
        arr = np.array(self.values, dtype=np.float64)
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @classmethod
    def exact(cls, values: Sequence[float], fmt: FpFormat) -> "TaggedVector":
        """Tag values that must already be representable; raises ValueError otherwise."""
        arr = np.asarray(values, dtype=np.float64)
        rnd = _rounder_for(fmt)
        for v in arr:
            try:
                ok = rnd(float(v)) == v
            except FpOverflow:
                ok = False
            if not ok:
                raise ValueError(f"{v!r} is not representable in {fmt.name}")
        return cls(arr, fmt)

    def __len__(self):
        return len(self.values)

    def __iter__(self):
        return iter(self.values.tolist())

    def __getitem__(self, i):
        return TaggedValue(float(self.values[i]), self.fmt)

    def tolist(self) -> list[float]:
        return self.values.tolist()

    def same_bits(self, other: "TaggedVector") -> bool:
        return self.fmt == other.fmt and self.values.tobytes() == other.values.tobytes()

    def __repr__(self):
        return f"TaggedVector({self.values.tolist()}, {self.fmt.name})"


def round_to_format(x, fmt: FpFormat) -> TaggedValue:
    """Round a real number (float, int, Fraction or DefinedReal) to ``fmt``."""
    if isinstance(x, float):
        if not math.isfinite(x):
            raise FpOverflow(f"{x} is not finite")
        y = _rounder_for(fmt)(x)
        exact = Fraction(x)
    else:
        exact = defined.to_fraction(x) if isinstance(x, defined.DefinedReal) else Fraction(x)
        y = round_fraction(exact, fmt)
    uf = exact != 0 and _is_tiny(y, fmt) and Fraction(y) != exact
    return TaggedValue(y, fmt, uf)


# ---------------------------------------------------------------------------
# arithmetic


def _op_value(a: float, b: float, op: str, fmt: FpFormat) -> tuple[float, bool]:
    rnd = _rounder_for(fmt)
    if op == "+":
        return rnd(a + b), False
    if op == "-":
        return rnd(a - b), False
    if op == "*":
        y = rnd(a * b)
        return y, (a != 0.0 and b != 0.0 and _is_tiny(y, fmt))
    if op == "/":
        if b == 0.0:
            raise FpDivisionByZero("division by zero")
        y = rnd(a / b)
        return y, (a != 0.0 and _is_tiny(y, fmt))
    raise ValueError(f"unknown operation {op!r}")


def fp_op(a: TaggedValue, b: TaggedValue, op: str) -> TaggedValue:
    """``fl(a op b)`` in the higher-precision of the two operand formats."""
    fmt = higher(a.fmt, b.fmt)
    y, uf = _op_value(a.value, b.value, op, fmt)
    return TaggedValue(y, fmt, uf)


def fp_sqrt(a: TaggedValue) -> TaggedValue:
    if a.value < 0:
        raise FpDomainError("square root of a negative number")
    return TaggedValue(_rounder_for(a.fmt)(math.sqrt(a.value)), a.fmt)


def _dot_values(x: Sequence[float], y: Sequence[float], fmt: FpFormat) -> tuple[float, bool]:
    """Sequential multiply-then-accumulate, every operation rounded to ``fmt``."""
    rnd = _rounder_for(fmt)
    tiny = fmt.min_normal
    acc = 0.0
    uf = False
    for i, (a, b) in enumerate(zip(x, y)):
        p = rnd(a * b)
        if p != 0.0:
            uf = uf or abs(p) < tiny
        elif a != 0.0 and b != 0.0:
            uf = True
        acc = p if i == 0 else rnd(acc + p)
    return acc, uf


def fp_dot(x: TaggedVector, y: TaggedVector) -> TaggedValue:
    """In-format dot product accumulated left to right, no fused operations."""
    if len(x) != len(y):
        raise ValueError("dot product of vectors with different lengths")
    fmt = higher(x.fmt, y.fmt)
    val, uf = _dot_values(x.values.tolist(), y.values.tolist(), fmt)
    return TaggedValue(val, fmt, uf)


def fp_norm(x: TaggedVector) -> TaggedValue:
    """``fl(sqrt(fl(x . x)))`` in the vector's format; no rescaling."""
    sq = fp_dot(x, x)
    return TaggedValue(_rounder_for(x.fmt)(math.sqrt(sq.value)), x.fmt, sq.underflow)


def cast(x: TaggedVector, to: FpFormat) -> TaggedVector:
    """Upcasts are exact; downcasts round each component to nearest."""
    if to.index >= x.fmt.index and to.precision >= x.fmt.precision:
        return TaggedVector(x.values, to, x.underflow)
    rnd = _rounder_for(to)
    out = [rnd(v) for v in x.values.tolist()]
    uf = any(v != 0.0 and abs(r) < to.min_normal and r != v for v, r in zip(x.values.tolist(), out))
    return TaggedVector(out, to, uf)


def vec_op(x: TaggedVector, y: TaggedVector, op: str) -> TaggedVector:
    """Componentwise ``fl(x_i op y_i)`` in the higher of the two formats."""
    if len(x) != len(y):
        raise ValueError("length mismatch")
    fmt = higher(x.fmt, y.fmt)
    vals, flags = zip(*(_op_value(a, b, op, fmt) for a, b in zip(x.values.tolist(), y.values.tolist()))) if len(x) else ((), ())
    return TaggedVector(list(vals), fmt, any(flags))


def vec_scalar(x: TaggedVector, s: float, op: str, fmt: FpFormat | None = None) -> TaggedVector:
    """Componentwise ``fl(x_i op s)`` with ``s`` assumed representable in the result format."""
    fmt = x.fmt if fmt is None else higher(x.fmt, fmt)
    pairs = [_op_value(a, s, op, fmt) for a in x.values.tolist()]
    return TaggedVector([p[0] for p in pairs], fmt, any(p[1] for p in pairs))


def lowest_exact_format(values: Sequence[float], stack: Sequence[FpFormat]) -> FpFormat:
    """Least precise format of ``stack`` holding every value exactly."""
    for fmt in stack:
        if all(is_representable(float(v), fmt) for v in values):
            return fmt
    raise ValueError("values not representable in any format of the stack")
