"""Expression graphs for test objectives, compiled per arithmetic kind.

An objective is written once as ordinary Python over traced :class:`Node`
objects.  The resulting DAG supports ``+ - * /``, unary minus, non-negative
integer powers, ``sqrt`` and an n-ary left-to-right sum.  It is compiled to
straight-line Python source for each scalar kind (format-rounded floats,
outward-rounded intervals, exact rationals, DefinedReals).

Gradients use forward-mode differentiation with static sparsity: every node
carries tangents only for the variables it depends on, so the generated code
has one scalar statement per nonzero tangent entry.  Every tangent operation
is an operation of the kind, hence rounded in the evaluation format.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from . import defined
from .errors import (
    FpDivisionByZero,
    FpDomainError,
    FpOverflow,
    MPR2Error,
    UnsupportedPrimitive,
)
from .fpenv import FpFormat, _rounder_for, round_fraction
from .interval import IntervalOps

VAR, CONST, ADD, SUB, MUL, DIV, NEG, SQRT, POW, SUM = range(10)
_OPNAMES = {ADD: "add", SUB: "sub", MUL: "mul", DIV: "div"}


class IrrationalResult(MPR2Error, ArithmeticError):
    """Exact rational evaluation hit the square root of a non-square."""


# ---------------------------------------------------------------------------
# tracing


class _Graph:
    def __init__(self):
        self.ops: list[int] = []
        self.args: list[tuple] = []
        self.data: list = []

    def add(self, op, args=(), data=None) -> "Node":
        self.ops.append(op)
        self.args.append(tuple(args))
        self.data.append(data)
        return Node(self, len(self.ops) - 1)


class Node:
    __slots__ = ("g", "i")

    def __init__(self, g: _Graph, i: int):
        self.g = g
        self.i = i

    def _wrap(self, other) -> "Node":
        if isinstance(other, Node):
            if other.g is not self.g:
                raise ValueError("nodes from different expressions")
            return other
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return self.g.add(CONST, (), Fraction(other))
        if isinstance(other, float):
            return self.g.add(CONST, (), Fraction(other))
        raise UnsupportedPrimitive(f"cannot use {type(other).__name__} in an expression")

    def _bin(self, op, other, reflected=False):
        o = self._wrap(other)
        a, b = (o, self) if reflected else (self, o)
        return self.g.add(op, (a.i, b.i))

    def __add__(self, o):
        return self._bin(ADD, o)

    def __radd__(self, o):
        return self._bin(ADD, o, True)

    def __sub__(self, o):
        return self._bin(SUB, o)

    def __rsub__(self, o):
        return self._bin(SUB, o, True)

    def __mul__(self, o):
        return self._bin(MUL, o)

    def __rmul__(self, o):
        return self._bin(MUL, o, True)

    def __truediv__(self, o):
        return self._bin(DIV, o)

    def __rtruediv__(self, o):
        return self._bin(DIV, o, True)

    def __neg__(self):
        return self.g.add(NEG, (self.i,))

    def __pos__(self):
        return self

    def __pow__(self, k):
        if isinstance(k, bool) or not isinstance(k, int) or k < 0:
            raise UnsupportedPrimitive(f"only non-negative integer powers are supported, got {k!r}")
        return self.g.add(POW, (self.i,), k)

    def __float__(self):
        raise UnsupportedPrimitive("expression nodes have no float value; use the provided primitives")


def sqrt(x: Node) -> Node:
    if not isinstance(x, Node):
        raise UnsupportedPrimitive("sqrt of a non-expression")
    return x.g.add(SQRT, (x.i,))


def esum(terms: Iterable) -> Node:
    """Sum accumulated strictly left to right."""
    terms = list(terms)
    nodes = [t for t in terms if isinstance(t, Node)]
    if not nodes:
        raise ValueError("esum needs at least one expression term")
    g = nodes[0].g
    idx = [nodes[0]._wrap(t).i for t in terms]
    if len(idx) == 1:
        return Node(g, idx[0])
    return g.add(SUM, idx)


# ---------------------------------------------------------------------------
# arithmetic kinds: source templates for the code generator


class Kind:
    """Source templates plus runtime namespace for one scalar kind."""

    key: tuple = ()
    has_pow = False

    def namespace(self) -> dict:
        return {}

    def const(self, c: Fraction):
        raise NotImplementedError

    def lift(self, x):
        return x

    def add(self, a, b):
        raise NotImplementedError

    def sub(self, a, b):
        raise NotImplementedError

    def mul(self, a, b):
        raise NotImplementedError

    def div(self, a, b):
        raise NotImplementedError

    def neg(self, a):
        return f"(-{a})"

    def sqrt(self, a):
        raise NotImplementedError

    def pow(self, a, k):
        raise NotImplementedError

    def check(self, names: Sequence[str]) -> list[str]:
        return []


class RoundedKind(Kind):
    """Python floats, every operation rounded to nearest in ``fmt``."""

    def __init__(self, fmt: FpFormat):
        self.fmt = fmt
        self.native = fmt.is_native
        self.key = ("rounded", fmt.precision, fmt.emin, fmt.emax)

    def namespace(self):
        return {"R": _rounder_for(self.fmt), "_sqrt": math.sqrt, "_isfinite": math.isfinite}

    def const(self, c):
        return round_fraction(Fraction(c), self.fmt)

    def lift(self, x):
        return float(x)

    def _r(self, s):
        return s if self.native else f"R({s})"

    def add(self, a, b):
        return self._r(f"{a} + {b}")

    def sub(self, a, b):
        return self._r(f"{a} - {b}")

    def mul(self, a, b):
        return self._r(f"{a} * {b}")

    def div(self, a, b):
        return self._r(f"{a} / {b}")

    def sqrt(self, a):
        return self._r(f"_sqrt({a})")

    def check(self, names):
        if not self.native or not names:
            return []
        out = []
        for start in range(0, len(names), 200):
            chunk = ", ".join(names[start:start + 200])
            out.append(f"for _v in ({chunk},):\n        if not _isfinite(_v): raise _Overflow('double overflow')")
        return out


class IntervalKind(Kind):
    """Tuples ``(lo, hi)`` with outward rounding in ``fmt``."""

    has_pow = True

    def __init__(self, fmt: FpFormat):
        self.fmt = fmt
        self.ops = IntervalOps(fmt)
        self.key = ("interval", fmt.precision, fmt.emin, fmt.emax)

    def namespace(self):
        o = self.ops
        return {"Iadd": o.add, "Isub": o.sub, "Imul": o.mul, "Idiv": o.div, "Ineg": o.neg,
                "Isqrt": o.sqrt, "Ipow": o.pow}

    def const(self, c):
        return self.ops.const(c)

    def lift(self, x):
        return (float(x), float(x))

    def add(self, a, b):
        return f"Iadd({a}, {b})"

    def sub(self, a, b):
        return f"Isub({a}, {b})"

    def mul(self, a, b):
        return f"Imul({a}, {b})"

    def div(self, a, b):
        return f"Idiv({a}, {b})"

    def neg(self, a):
        return f"Ineg({a})"

    def sqrt(self, a):
        return f"Isqrt({a})"

    def pow(self, a, k):
        return f"Ipow({a}, {k})"


def _rational_sqrt(q: Fraction) -> Fraction:
    if q < 0:
        raise FpDomainError("square root of a negative number")
    n, d = q.numerator, q.denominator
    rn, rd = math.isqrt(n), math.isqrt(d)
    if rn * rn != n or rd * rd != d:
        raise IrrationalResult(f"sqrt({q}) is irrational")
    return Fraction(rn, rd)


class RationalKind(Kind):
    """Exact arithmetic on Fractions; square roots must be exact."""

    key = ("rational",)

    def namespace(self):
        return {"_rsqrt": _rational_sqrt}

    def const(self, c):
        return Fraction(c)

    def lift(self, x):
        return Fraction(x)

    def add(self, a, b):
        return f"({a} + {b})"

    def sub(self, a, b):
        return f"({a} - {b})"

    def mul(self, a, b):
        return f"({a} * {b})"

    def div(self, a, b):
        return f"({a} / {b})"

    def sqrt(self, a):
        return f"_rsqrt({a})"


ENCLOSURE_BITS = 256


def _frac_sqrt_bounds(q: Fraction, bits: int = ENCLOSURE_BITS) -> tuple[Fraction, Fraction]:
    if q < 0:
        raise FpDomainError("square root of a negative number")
    if q == 0:
        return Fraction(0), Fraction(0)
    scale = 4**bits
    r = math.isqrt(q.numerator * scale // q.denominator)
    lo = Fraction(r, 2**bits)
    hi = Fraction(r + 1, 2**bits)
    if lo * lo == q:
        hi = lo
    return lo, hi


class _RationalIntervalOps:
    """Exact rational interval arithmetic; only square roots widen."""

    @staticmethod
    def add(a, b):
        return (a[0] + b[0], a[1] + b[1])

    @staticmethod
    def sub(a, b):
        return (a[0] - b[1], a[1] - b[0])

    @staticmethod
    def neg(a):
        return (-a[1], -a[0])

    @staticmethod
    def mul(a, b):
        if a[0] == a[1] and b[0] == b[1]:
            p = a[0] * b[0]
            return (p, p)
        ps = [x * y for x in a for y in b]
        return (min(ps), max(ps))

    @staticmethod
    def div(a, b):
        if b[0] <= 0 <= b[1]:
            raise FpDivisionByZero("division by an interval containing zero")
        if a[0] == a[1] and b[0] == b[1]:
            q = a[0] / b[0]
            return (q, q)
        qs = [x / y for x in a for y in b]
        return (min(qs), max(qs))

    @staticmethod
    def sqrt(a):
        if a[0] < 0:
            raise FpDomainError("square root of an interval reaching below zero")
        return (_frac_sqrt_bounds(a[0])[0], _frac_sqrt_bounds(a[1])[1])

    @staticmethod
    def pow(a, k):
        lo, hi = a
        if k == 0:
            return (Fraction(1), Fraction(1))
        if lo >= 0 or k % 2 == 1:
            return (lo**k, hi**k)
        if hi <= 0:
            return (hi**k, lo**k)
        return (Fraction(0), max(-lo, hi) ** k)


class EnclosureKind(IntervalKind):
    """Rational intervals: exact except for irrational square roots."""

    def __init__(self):
        self.ops = _RationalIntervalOps()
        self.key = ("enclosure",)

    def const(self, c):
        c = Fraction(c)
        return (c, c)

    def lift(self, x):
        x = Fraction(x)
        return (x, x)


class DefinedKind(Kind):
    """128-bit DefinedReal arithmetic."""

    key = ("defined",)

    def namespace(self):
        return {"_dsqrt": defined.sqrt}

    def const(self, c):
        return defined.dr(Fraction(c))

    def lift(self, x):
        return defined.dr(x)

    def add(self, a, b):
        return f"({a} + {b})"

    def sub(self, a, b):
        return f"({a} - {b})"

    def mul(self, a, b):
        return f"({a} * {b})"

    def div(self, a, b):
        return f"({a} / {b})"

    def sqrt(self, a):
        return f"_dsqrt({a})"


# ---------------------------------------------------------------------------
# compiled expressions


class Expression:
    """An immutable compiled objective of ``n`` variables."""

    def __init__(self, n: int, graph: _Graph, out: int):
        self.n = n
        self._ops = tuple(graph.ops)
        self._args = tuple(graph.args)
        self._data = tuple(graph.data)
        self.out = out
        self._live = self._reachable()
        self._deps = self._dependencies()
        self._cache: dict = {}

    @classmethod
    def trace(cls, fn: Callable[[list[Node]], Node], n: int) -> "Expression":
        g = _Graph()
        xs = [g.add(VAR, (), i) for i in range(n)]
        out = fn(xs)
        if not isinstance(out, Node):
            out = xs[0]._wrap(out) if xs else None
        if out is None:
            raise ValueError("expression of zero variables")
        return cls(n, g, out.i)

    @property
    def size(self) -> int:
        return len(self._live)

    def _reachable(self) -> list[int]:
        seen = set()
        stack = [self.out]
        while stack:
            j = stack.pop()
            if j in seen:
                continue
            seen.add(j)
            stack.extend(self._args[j])
        return sorted(seen)

    def _dependencies(self) -> dict[int, tuple[int, ...]]:
        deps: dict[int, tuple[int, ...]] = {}
        for j in self._live:
            op = self._ops[j]
            if op == VAR:
                deps[j] = (self._data[j],)
            elif op == CONST or (op == POW and self._data[j] == 0):
                deps[j] = ()
            else:
                s = set()
                for a in self._args[j]:
                    s.update(deps[a])
                deps[j] = tuple(sorted(s))
        return deps

    def uses_sqrt(self) -> bool:
        return any(self._ops[j] == SQRT for j in self._live)

    # -- code generation ----------------------------------------------------

    def _gen(self, kind: Kind, gradient: bool) -> Callable:
        ns = dict(kind.namespace())
        ns["_Overflow"] = FpOverflow
        lines = []
        emit = lines.append
        produced = []
        ops, args, data, deps = self._ops, self._args, self._data, self._deps

        def const_name(c: Fraction) -> str:
            name = f"k{len(ns)}"
            ns[name] = kind.const(c)
            return name

        def pow_expr(a: str, k: int, target: str):
            if kind.has_pow:
                emit(f"{target} = {kind.pow(a, k)}")
                return
            if k == 0:
                emit(f"{target} = {const_name(Fraction(1))}")
                return
            emit(f"{target} = {a}")
            for _ in range(k - 1):
                emit(f"{target} = {kind.mul(target, a)}")

        for j in self._live:
            op, ar = ops[j], args[j]
            v = f"v{j}"
            va = [f"v{a}" for a in ar]
            if op == VAR:
                emit(f"{v} = x[{data[j]}]")
            elif op == CONST:
                ns[v] = kind.const(data[j])
                continue
            elif op in _OPNAMES:
                emit(f"{v} = {getattr(kind, _OPNAMES[op])(va[0], va[1])}")
            elif op == NEG:
                emit(f"{v} = {kind.neg(va[0])}")
            elif op == SQRT:
                emit(f"{v} = {kind.sqrt(va[0])}")
            elif op == POW:
                pow_expr(va[0], data[j], v)
            elif op == SUM:
                emit(f"{v} = {va[0]}")
                for a in va[1:]:
                    emit(f"{v} = {kind.add(v, a)}")
            produced.append(v)

            if not gradient:
                continue
            a0 = ar[0] if ar else None
            da = set(deps[a0]) if a0 is not None else set()
            db = set(deps[ar[1]]) if len(ar) > 1 and op != SUM else set()
            if op == VAR:
                emit(f"d{j}_{data[j]} = {const_name(Fraction(1))}")
                produced.append(f"d{j}_{data[j]}")
                continue
            if op == POW:
                k = data[j]
                if k == 0:
                    continue
                if k >= 2:
                    t = f"t{j}"
                    if k == 2:
                        emit(f"{t} = {kind.mul(const_name(Fraction(2)), va[0])}")
                    else:
                        pow_expr(va[0], k - 1, t)
                        emit(f"{t} = {kind.mul(const_name(Fraction(k)), t)}")
                    produced.append(t)
            elif op == SQRT:
                emit(f"t{j} = {kind.mul(const_name(Fraction(2)), v)}")
                produced.append(f"t{j}")
            if op == SUM:
                seen: set[int] = set()
                for a in ar:
                    for i in deps[a]:
                        if i in seen:
                            emit(f"d{j}_{i} = {kind.add(f'd{j}_{i}', f'd{a}_{i}')}")
                        else:
                            emit(f"d{j}_{i} = d{a}_{i}")
                            seen.add(i)
                produced.extend(f"d{j}_{i}" for i in deps[j])
                continue
            for i in deps[j]:
                ta = f"d{a0}_{i}"
                tb = f"d{ar[1]}_{i}" if len(ar) > 1 else None
                ina, inb = i in da, i in db
                if op == ADD:
                    e = kind.add(ta, tb) if ina and inb else (ta if ina else tb)
                elif op == SUB:
                    e = kind.sub(ta, tb) if ina and inb else (ta if ina else kind.neg(tb))
                elif op == NEG:
                    e = kind.neg(ta)
                elif op == MUL:
                    if ina and inb:
                        e = kind.add(kind.mul(ta, va[1]), kind.mul(va[0], tb))
                    elif ina:
                        e = kind.mul(ta, va[1])
                    else:
                        e = kind.mul(va[0], tb)
                elif op == DIV:
                    if ina and inb:
                        e = kind.div(kind.sub(ta, kind.mul(v, tb)), va[1])
                    elif ina:
                        e = kind.div(ta, va[1])
                    else:
                        e = kind.div(kind.neg(kind.mul(v, tb)), va[1])
                elif op == POW:
                    e = ta if data[j] == 1 else kind.mul(f"t{j}", ta)
                elif op == SQRT:
                    e = kind.div(ta, f"t{j}")
                else:  # pragma: no cover
                    raise AssertionError(op)
                emit(f"d{j}_{i} = {e}")
                produced.append(f"d{j}_{i}")

        out = self.out
        if ops[out] == CONST:
            lines.append(f"v{out} = v{out}")
        lines.extend(kind.check(produced))
        if gradient:
            zero = const_name(Fraction(0))
            comps = [f"d{out}_{i}" if i in set(deps[out]) else zero for i in range(self.n)]
            if ops[out] == VAR:
                comps = [f"d{out}_{i}" if i == data[out] else zero for i in range(self.n)]
            lines.append(f"return v{out}, [{', '.join(comps)}]")
        else:
            lines.append(f"return v{out}")
        src = "def _compiled(x):\n" + "\n".join("    " + ln for ln in lines) + "\n"
        exec(compile(src, f"<expr {kind.key}>", "exec"), ns)
        fn = ns["_compiled"]
        fn.__source__ = src
        return fn

    def compiled(self, kind: Kind, gradient: bool = False) -> Callable:
        key = (kind.key, gradient)
        fn = self._cache.get(key)
        if fn is None:
            fn = self._gen(kind, gradient)
            self._cache[key] = fn
        return fn

    def _call(self, kind, x, gradient):
        if len(x) != self.n:
            raise ValueError(f"expected {self.n} variables, got {len(x)}")
        fn = self.compiled(kind, gradient)
        xs = [kind.lift(v) for v in x]
        try:
            return fn(xs)
        except MPR2Error:
            raise
        except ZeroDivisionError as exc:
            raise FpDivisionByZero(str(exc)) from exc
        except OverflowError as exc:
            raise FpOverflow(str(exc)) from exc
        except ValueError as exc:
            raise FpDomainError(str(exc)) from exc

    def value(self, kind: Kind, x: Sequence):
        return self._call(kind, x, False)

    def value_and_grad(self, kind: Kind, x: Sequence):
        return self._call(kind, x, True)


__all__ = [
    "Node", "sqrt", "esum", "Expression", "Kind", "RoundedKind", "IntervalKind", "RationalKind",
    "EnclosureKind", "DefinedKind", "IrrationalResult",
]
