"""Outward-rounded interval arithmetic over an emulated format.

Each endpoint operation first rounds to nearest, then decides exactly on which
side of the rounded value the true result lies and steps one value outward
only when needed.  Exact operations therefore give degenerate intervals, and
inexact ones lose at most one unit in the last place per endpoint.

The side is found with error-free transformations (TwoSum, Dekker's product)
evaluated in double precision; operands outside the range where those are
exact fall back to rational arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import FpDivisionByZero, FpDomainError, FpOverflow
from .fpenv import FpFormat, _rounder_for, next_down, next_up, round_fraction, NEAREST

_SPLIT = 134217729.0  # 2**27 + 1
_SAFE_HI = 2.0**900
_SAFE_LO = 2.0**-900


def _split(a):
    c = _SPLIT * a
    hi = c - (c - a)
    return hi, a - hi


def _two_prod(a, b):
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    err = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, err


def _two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _sgn(x):
    return (x > 0) - (x < 0)


def _combine(d, e):
    """Sign of ``d + e`` when ``d`` is exact and decisive, else None."""
    if d == 0.0:
        return _sgn(e)
    if abs(d) > abs(e):
        return _sgn(d)
    return None


def _safe(*xs):
    for x in xs:
        if x != 0.0 and not (_SAFE_LO < abs(x) < _SAFE_HI):
            return False
    return True


class Directed:
    """Round-to-nearest result plus the exact side of the true result."""

    def __init__(self, fmt: FpFormat):
        self.fmt = fmt
        self.rnd = _rounder_for(fmt)
        self.narrow = 2 * fmt.precision <= 53
        self.tiny = fmt.min_normal

    # each ``side_*`` returns (y, s) with y = RN(a op b), s = sign(exact - y)

    def _exact_side(self, exact: Fraction, y: float):
        return _sgn(exact - Fraction(y))

    def side_add(self, a, b):
        s, e = _two_sum(a, b)
        if math.isinf(s):
            raise FpOverflow("interval endpoint overflow")
        y = self.rnd(s)
        sg = _combine(s - y, e)
        if sg is None:
            sg = self._exact_side(Fraction(a) + Fraction(b), y)
        return y, sg

    def side_sub(self, a, b):
        return self.side_add(a, -b)

    def side_mul(self, a, b):
        p = a * b
        if math.isinf(p):
            raise FpOverflow("interval endpoint overflow")
        if self.narrow and (p == 0.0 or abs(p) >= 2.0**-1022 or a == 0.0 or b == 0.0):
            y = self.rnd(p)
            return y, _sgn(p - y)
        if p != 0.0 and _safe(a, b, p):
            p, e = _two_prod(a, b)
            y = self.rnd(p)
            sg = _combine(p - y, e)
            if sg is not None:
                return y, sg
        exact = Fraction(a) * Fraction(b)
        y = round_fraction(exact, self.fmt, NEAREST)
        return y, self._exact_side(exact, y)

    def side_div(self, a, b):
        if b == 0.0:
            raise FpDivisionByZero("interval division by zero")
        q = a / b
        if math.isinf(q):
            raise FpOverflow("interval endpoint overflow")
        y = self.rnd(q)
        sb = _sgn(b)
        if y != 0.0 and abs(y) >= self.tiny and _safe(a, b, y):
            if self.narrow:
                r = a - y * b
                return y, _sgn(r) * sb
            p, pe = _two_prod(y, b)
            sg = _combine(a - p, -pe)
            if sg is not None:
                return y, sg * sb
        exact = Fraction(a) / Fraction(b)
        y = round_fraction(exact, self.fmt, NEAREST)
        return y, self._exact_side(exact, y)

    def side_sqrt(self, a):
        if a < 0.0:
            raise FpDomainError("square root of a negative number")
        y = self.rnd(math.sqrt(a))
        if a == 0.0:
            return y, 0
        if _safe(a, y):
            if self.narrow:
                return y, _sgn(a - y * y)
            p, pe = _two_prod(y, y)
            sg = _combine(a - p, -pe)
            if sg is not None:
                return y, sg
        fa, fy = Fraction(a), Fraction(y)
        return y, _sgn(fa - fy * fy)

    def down(self, y, sg):
        return y if sg >= 0 else next_down(y, self.fmt)

    def up(self, y, sg):
        return y if sg <= 0 else next_up(y, self.fmt)

    def pair(self, side):
        y, sg = side
        return self.down(y, sg), self.up(y, sg)


@dataclass(frozen=True)
class Interval:
    """Closed interval ``[lo, hi]`` with endpoints in ``fmt``."""

    lo: float
    hi: float
    fmt: FpFormat | None = None

    def __post_init__(self):
        if not self.lo <= self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def __contains__(self, x) -> bool:
        return Fraction(self.lo) <= Fraction(x) <= Fraction(self.hi)


class IntervalOps:
    """Interval operations on ``(lo, hi)`` tuples in one format."""

    def __init__(self, fmt: FpFormat):
        self.fmt = fmt
        self.d = Directed(fmt)

    def const(self, c: Fraction):
        c = Fraction(c)
        lo = round_fraction(c, self.fmt, "down")
        hi = round_fraction(c, self.fmt, "up")
        return (lo, hi)

    def point(self, x: float):
        return (x, x)

    def add(self, a, b):
        d = self.d
        y, s = d.side_add(a[0], b[0])
        lo = d.down(y, s)
        if a[0] == a[1] and b[0] == b[1]:
            return (lo, d.up(y, s))
        y, s = d.side_add(a[1], b[1])
        return (lo, d.up(y, s))

    def sub(self, a, b):
        return self.add(a, (-b[1], -b[0]))

    def neg(self, a):
        return (-a[1], -a[0])

    def mul(self, a, b):
        d = self.d
        al, ah = a
        bl, bh = b
        if al == ah and bl == bh:
            return d.pair(d.side_mul(al, bl))
        if al >= 0.0 and bl >= 0.0:
            return (d.down(*d.side_mul(al, bl)), d.up(*d.side_mul(ah, bh)))
        los, his = [], []
        for x in (al, ah):
            for y in (bl, bh):
                lo, hi = d.pair(d.side_mul(x, y))
                los.append(lo)
                his.append(hi)
        return (min(los), max(his))

    def div(self, a, b):
        d = self.d
        al, ah = a
        bl, bh = b
        if bl <= 0.0 <= bh:
            raise FpDivisionByZero("division by an interval containing zero")
        if al == ah and bl == bh:
            return d.pair(d.side_div(al, bl))
        los, his = [], []
        for x in (al, ah):
            for y in (bl, bh):
                lo, hi = d.pair(d.side_div(x, y))
                los.append(lo)
                his.append(hi)
        return (min(los), max(his))

    def sqrt(self, a):
        if a[0] < 0.0:
            raise FpDomainError("square root of an interval reaching below zero")
        d = self.d
        return (d.down(*d.side_sqrt(a[0])), d.up(*d.side_sqrt(a[1])))

    def _pow_mag(self, x, k, upward):
        """Repeated directed multiplication of ``x >= 0`` by itself."""
        d = self.d
        r = x
        for _ in range(k - 1):
            y, s = d.side_mul(r, x)
            r = d.up(y, s) if upward else d.down(y, s)
        return r

    def pow(self, a, k: int):
        lo, hi = a
        if k == 0:
            return (1.0, 1.0)
        if k == 1:
            return a
        if lo >= 0.0:
            return (self._pow_mag(lo, k, False), self._pow_mag(hi, k, True))
        if k % 2 == 1:
            if hi <= 0.0:
                return (-self._pow_mag(-lo, k, True), -self._pow_mag(-hi, k, False))
            return (-self._pow_mag(-lo, k, True), self._pow_mag(hi, k, True))
        if hi <= 0.0:
            return (self._pow_mag(-hi, k, False), self._pow_mag(-lo, k, True))
        return (0.0, self._pow_mag(max(-lo, hi), k, True))


__all__ = ["Directed", "Interval", "IntervalOps"]
