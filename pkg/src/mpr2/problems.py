"""Built-in unconstrained test problems.

Every problem is an expression over the traced primitives of
:mod:`mpr2.expr`, so the same definition is evaluated in rounded formats,
interval arithmetic and exact rationals.  Start points are representable in
half precision; the classical coordinate -1.2 is stored as its half-precision
rounding -1.2001953125.  ``PROBLEMS.md`` at the repository root lists the
definitions.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, NamedTuple, Optional, Sequence

from .errors import BadDimension, UnknownProblem
from .expr import EnclosureKind, Expression, IrrationalResult, RationalKind, esum, sqrt
from .fpenv import HALF, round_fraction

F = Fraction
M12 = round_fraction(F(-12, 10), HALF)  # -1.2001953125


@dataclass(frozen=True)
class Problem:
    name: str
    n: int
    expr: Expression
    x0: tuple[float, ...]
    f_low: Optional[Fraction] = None
    L_hint: Optional[Fraction] = None
    x_star: Optional[tuple[Fraction, ...]] = None
    description: str = ""

    def __repr__(self):
        return f"Problem({self.name!r}, n={self.n})"


@dataclass(frozen=True)
class _Entry:
    build: Callable[[list], object]
    dims: Callable[[int], bool]
    dims_text: str
    x0: Callable[[int], Sequence[float]]
    default_n: int
    f_low: Callable[[int], Optional[Fraction]] = lambda n: F(0)
    L_hint: Callable[[int], Optional[Fraction]] = lambda n: None
    x_star: Callable[[int], Optional[Sequence[Fraction]]] = lambda n: None
    description: str = ""


def _any(lo=1, hi=100):
    return lambda n: lo <= n <= hi


def _quadratic(x):
    return esum(F(i + 1, 2) * xi**2 for i, xi in enumerate(x))


def _sphere(x):
    return esum(xi**2 for xi in x) / 2


def _rosenbrock(x):
    return esum(100 * (x[i + 1] - x[i] ** 2) ** 2 + (1 - x[i]) ** 2 for i in range(len(x) - 1))


def _ext_rosenbrock(x):
    return esum(100 * (x[2 * i + 1] - x[2 * i] ** 2) ** 2 + (1 - x[2 * i]) ** 2 for i in range(len(x) // 2))


def _beale(x):
    a, b = x
    return esum([(F(3, 2) - a + a * b) ** 2, (F(9, 4) - a + a * b**2) ** 2, (F(21, 8) - a + a * b**3) ** 2])


def _himmelblau(x):
    a, b = x
    return esum([(a**2 + b - 11) ** 2, (a + b**2 - 7) ** 2])


def _booth(x):
    a, b = x
    return esum([(a + 2 * b - 7) ** 2, (2 * a + b - 5) ** 2])


def _matyas(x):
    a, b = x
    return esum([F(26, 100) * (a**2 + b**2), -(F(48, 100) * a * b)])


def _camel(x):
    a, b = x
    return esum([2 * a**2, -(F(105, 100) * a**4), a**6 / 6, a * b, b**2])


def _quartics(x):
    return esum((xi - 1) ** 4 for xi in x)


def _woods(x):
    a, b, c, d = x
    return esum([
        100 * (b - a**2) ** 2, (1 - a) ** 2, 90 * (d - c**2) ** 2, (1 - c) ** 2,
        10 * (b + d - 2) ** 2, (b - d) ** 2 / 10,
    ])


def _trid(x):
    return esum([esum((xi - 1) ** 2 for xi in x), -esum(x[i] * x[i - 1] for i in range(1, len(x)))]) \
        if len(x) > 1 else esum((xi - 1) ** 2 for xi in x)


def _styblinski(x):
    return esum((xi**4 - 16 * xi**2 + 5 * xi) / 2 for xi in x)


def _nqm(x):
    return esum(F(1, 2 * (i + 1)) * (xi - 1) ** 2 for i, xi in enumerate(x))


def _pseudo_huber(x):
    return esum(sqrt(1 + (xi - 1) ** 2) - 1 for xi in x)


def _dixon_price(x):
    terms = [(x[0] - 1) ** 2]
    terms += [(i + 1) * (2 * x[i] ** 2 - x[i - 1]) ** 2 for i in range(1, len(x))]
    return esum(terms)


def _zakharov(x):
    s = esum(F(i + 1, 2) * xi for i, xi in enumerate(x))
    return esum([esum(xi**2 for xi in x), s**2, s**4])


def _powell(x):
    terms = []
    for j in range(0, len(x), 4):
        a, b, c, d = x[j:j + 4]
        terms += [(a + 10 * b) ** 2, 5 * (c - d) ** 2, (b - 2 * c) ** 4, 10 * (a - d) ** 4]
    return esum(terms)


def _shifted_sphere(x):
    return esum([esum((xi - 1) ** 2 for xi in x) / 2, F(1000)])


_REGISTRY: dict[str, _Entry] = {
    "quadratic": _Entry(
        _quadratic, _any(), "1-100", lambda n: [1.0] * n, 10,
        L_hint=lambda n: F(n), x_star=lambda n: [F(0)] * n,
        description="0.5 * sum_i i * x_i^2 (diagonal Hessian 1..n)"),
    "sphere": _Entry(
        _sphere, _any(), "1-100", lambda n: [1.0] * n, 4,
        L_hint=lambda n: F(1), x_star=lambda n: [F(0)] * n,
        description="0.5 * sum_i x_i^2 (identity Hessian)"),
    "rosenbrock": _Entry(
        _rosenbrock, _any(2), "2-100", lambda n: [M12 if i % 2 == 0 else 1.0 for i in range(n)], 2,
        x_star=lambda n: [F(1)] * n,
        description="chained: sum_i 100 (x_{i+1} - x_i^2)^2 + (1 - x_i)^2"),
    "extended_rosenbrock": _Entry(
        _ext_rosenbrock, lambda n: 2 <= n <= 100 and n % 2 == 0, "even 2-100",
        lambda n: [M12 if i % 2 == 0 else 1.0 for i in range(n)], 4,
        x_star=lambda n: [F(1)] * n,
        description="separable pairs: sum_i 100 (x_{2i} - x_{2i-1}^2)^2 + (1 - x_{2i-1})^2"),
    "beale": _Entry(
        _beale, lambda n: n == 2, "2", lambda n: [1.0, 1.0], 2,
        x_star=lambda n: [F(3), F(1, 2)],
        description="(1.5 - x + xy)^2 + (2.25 - x + xy^2)^2 + (2.625 - x + xy^3)^2"),
    "himmelblau": _Entry(
        _himmelblau, lambda n: n == 2, "2", lambda n: [1.0, 1.0], 2,
        x_star=lambda n: [F(3), F(2)],
        description="(x^2 + y - 11)^2 + (x + y^2 - 7)^2"),
    "booth": _Entry(
        _booth, lambda n: n == 2, "2", lambda n: [0.0, 0.0], 2,
        L_hint=lambda n: F(18), x_star=lambda n: [F(1), F(3)],
        description="(x + 2y - 7)^2 + (2x + y - 5)^2"),
    "matyas": _Entry(
        _matyas, lambda n: n == 2, "2", lambda n: [1.0, 0.5], 2,
        L_hint=lambda n: F(1), x_star=lambda n: [F(0), F(0)],
        description="0.26 (x^2 + y^2) - 0.48 xy"),
    "three_hump_camel": _Entry(
        _camel, lambda n: n == 2, "2", lambda n: [1.0, 1.0], 2,
        x_star=lambda n: [F(0), F(0)],
        description="2x^2 - 1.05x^4 + x^6/6 + xy + y^2"),
    "sum_of_quartics": _Entry(
        _quartics, _any(), "1-100", lambda n: [0.0] * n, 4,
        x_star=lambda n: [F(1)] * n,
        description="sum_i (x_i - 1)^4"),
    "woods": _Entry(
        _woods, lambda n: n == 4, "4", lambda n: [-3.0, -1.0, -3.0, -1.0], 4,
        x_star=lambda n: [F(1)] * 4,
        description="Wood's four-variable function"),
    "trid": _Entry(
        _trid, _any(2), "2-100", lambda n: [0.0] * n, 6,
        f_low=lambda n: F(-n * (n + 4) * (n - 1), 6), L_hint=lambda n: F(4),
        x_star=lambda n: [F((i + 1) * (n - i)) for i in range(n)],
        description="sum_i (x_i - 1)^2 - sum_i x_i x_{i-1}; minimum -n(n+4)(n-1)/6"),
    "styblinski_tang": _Entry(
        _styblinski, _any(), "1-100", lambda n: [0.0] * n, 2,
        f_low=lambda n: F(-40 * n),
        description="0.5 * sum_i (x_i^4 - 16 x_i^2 + 5 x_i); lower bound -40n"),
    "nqm": _Entry(
        _nqm, _any(), "1-100", lambda n: [0.0] * n, 10,
        L_hint=lambda n: F(1), x_star=lambda n: [F(1)] * n,
        description="separable quadratic 0.5 * sum_i (x_i - 1)^2 / i"),
    "pseudo_huber": _Entry(
        _pseudo_huber, _any(), "1-100", lambda n: [0.0] * n, 10,
        L_hint=lambda n: F(1), x_star=lambda n: [F(1)] * n,
        description="sum_i sqrt(1 + (x_i - 1)^2) - 1"),
    "dixon_price": _Entry(
        _dixon_price, _any(), "1-100", lambda n: [1.0] * n, 3,
        description="(x_1 - 1)^2 + sum_{i>=2} i (2 x_i^2 - x_{i-1})^2"),
    "zakharov": _Entry(
        _zakharov, _any(), "1-100", lambda n: [0.5] * n, 2,
        x_star=lambda n: [F(0)] * n,
        description="sum x_i^2 + s^2 + s^4 with s = sum_i i x_i / 2"),
    "powell_singular": _Entry(
        _powell, lambda n: 4 <= n <= 100 and n % 4 == 0, "multiple of 4, 4-100",
        lambda n: [3.0, -1.0, 0.0, 1.0] * (n // 4), 4,
        x_star=lambda n: [F(0)] * n,
        description="Powell's singular function, blocks of four"),
    "shifted_sphere": _Entry(
        _shifted_sphere, _any(), "1-100", lambda n: [0.0] * n, 4,
        f_low=lambda n: F(1000), L_hint=lambda n: F(1), x_star=lambda n: [F(1)] * n,
        description="0.5 * sum_i (x_i - 1)^2 + 1000 (nonzero optimal value)"),
}


def problem_names() -> list[str]:
    return sorted(_REGISTRY)


def legal_dimensions(name: str) -> str:
    return _entry(name).dims_text


def default_dimension(name: str) -> int:
    return _entry(name).default_n


def _entry(name: str) -> _Entry:
    try:
        return _REGISTRY[name]
    except KeyError:
        raise UnknownProblem(name) from None


_CACHE: dict = {}


def get_problem(name: str, n: Optional[int] = None) -> Problem:
    entry = _entry(name)
    if n is None:
        n = entry.default_n
    if isinstance(n, bool) or not isinstance(n, int) or not entry.dims(n):
        raise BadDimension(f"{name} is defined for n in {entry.dims_text}, got {n!r}")
    key = (name, n)
    if key not in _CACHE:
        xs = entry.x_star(n)
        _CACHE[key] = Problem(
            name=name,
            n=n,
            expr=Expression.trace(entry.build, n),
            x0=tuple(float(v) for v in entry.x0(n)),
            f_low=entry.f_low(n),
            L_hint=entry.L_hint(n),
            x_star=None if xs is None else tuple(F(v) for v in xs),
            description=entry.description,
        )
    return _CACHE[key]


class Enclosure(NamedTuple):
    """Rational bounds on an irrational exact value."""

    lo: Fraction
    hi: Fraction


_RATIONAL = RationalKind()
_ENCLOSURE = EnclosureKind()


def exact_eval(p: Problem, x: Sequence):
    """Exact objective value; an :class:`Enclosure` when a square root is irrational."""
    try:
        return p.expr.value(_RATIONAL, [F(v) for v in x])
    except IrrationalResult:
        lo, hi = p.expr.value(_ENCLOSURE, [F(v) for v in x])
        return Enclosure(lo, hi)


def exact_grad(p: Problem, x: Sequence):
    """Exact gradient; components are Enclosures when square roots are irrational."""
    try:
        return p.expr.value_and_grad(_RATIONAL, [F(v) for v in x])[1]
    except IrrationalResult:
        g = p.expr.value_and_grad(_ENCLOSURE, [F(v) for v in x])[1]
        return [Enclosure(lo, hi) if lo != hi else lo for lo, hi in g]


def upper_abs(v) -> Fraction:
    """Upper bound on ``|v|`` for a Fraction or Enclosure."""
    if isinstance(v, Enclosure):
        return max(abs(v.lo), abs(v.hi))
    return abs(F(v))


# Default benchmark instances: (name, dimension).
DEFAULT_SUITE: tuple[tuple[str, int], ...] = (
    ("quadratic", 1), ("quadratic", 10), ("quadratic", 100),
    ("rosenbrock", 2), ("rosenbrock", 10),
    ("extended_rosenbrock", 4), ("extended_rosenbrock", 20),
    ("beale", 2), ("himmelblau", 2), ("booth", 2), ("matyas", 2), ("three_hump_camel", 2),
    ("sum_of_quartics", 4), ("woods", 4),
    ("trid", 6), ("trid", 20),
    ("styblinski_tang", 2), ("styblinski_tang", 20),
    ("nqm", 10), ("nqm", 50),
    ("pseudo_huber", 10), ("pseudo_huber", 100),
    ("dixon_price", 3), ("zakharov", 2), ("powell_singular", 4),
    ("shifted_sphere", 4),
)

__all__ = ["Problem", "get_problem", "problem_names", "exact_eval", "exact_grad", "Enclosure",
           "upper_abs", "DEFAULT_SUITE", "legal_dimensions", "default_dimension"]
