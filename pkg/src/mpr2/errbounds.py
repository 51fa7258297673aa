"""Rounding-error constants evaluated as DefinedReals.

All functions are pure.  Arguments ``u`` are unit roundoffs; anything accepted
by :func:`mpr2.defined.dr` works (floats, Fractions, DefinedReals).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

from . import defined
from .defined import ONE, ZERO, dr
from .errors import DegenerateStep, FpOverflow, InvalidDimension
from .fpenv import DOUBLE, FpFormat, TaggedValue, fp_op


class GammaFormula(str, Enum):
    """Bounds on ``|theta_n|`` for ``n`` accumulated rounding factors."""

    NU = "nu"
    HIGHAM = "nu/(1-nu)"
    CASTALDO = "nu/(1-nu/2)"

    @classmethod
    def parse(cls, name: "str | GammaFormula") -> "GammaFormula":
        if isinstance(name, GammaFormula):
            return name
        key = name.strip().lower().replace(" ", "")
        aliases = {
            "nu": cls.NU,
            "jeannerod": cls.NU,
            "nu/(1-nu)": cls.HIGHAM,
            "higham": cls.HIGHAM,
            "nu/(1-nu/2)": cls.CASTALDO,
            "castaldo": cls.CASTALDO,
        }
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown gamma formula {name!r}") from None


def gamma_n(n: int, u, formula: GammaFormula | str = GammaFormula.NU):
    """``gamma_n(u)`` under the selected formula; 0 for ``n == 0``."""
    if n < 0:
        raise InvalidDimension(f"negative count {n}")
    formula = GammaFormula.parse(formula)
    u = dr(u)
    if n == 0:
        return ZERO
    nu = n * u
    if nu >= 1:
        raise InvalidDimension(f"n*u = {float(nu)} >= 1 for n={n}")
    if formula is GammaFormula.NU:
        return nu
    if formula is GammaFormula.HIGHAM:
        return nu / (1 - nu)
    return nu / (1 - nu / 2)


def beta_from_gamma(g):
    g = dr(g)
    if g >= 1:
        raise InvalidDimension(f"gamma = {float(g)} >= 1")
    return max(abs(defined.sqrt(1 - g) - 1), abs(defined.sqrt(1 + g) - 1))


def beta_n(n: int, u, formula: GammaFormula | str = GammaFormula.NU):
    """Relative error bound of an in-format Euclidean norm of an (n-2)-vector."""
    return beta_from_gamma(gamma_n(n, u, formula))


def alpha_n(n: int, u, formula: GammaFormula | str = GammaFormula.NU):
    """``1 / (1 - gamma_{n+1}(u))`` for problem dimension ``n``."""
    g = gamma_n(n + 1, u, formula)
    if g >= 1:
        raise InvalidDimension(f"gamma_{n + 1} >= 1")
    return 1 / (1 - g)


def u_prime(u_g, u_c):
    """Combined rounding unit of the candidate sum and its cast.

    A candidate format at least as precise as the gradient format (``u_c <= u_g``)
    introduces no cast error and the bound reduces to ``u_g``.
    """
    u_g, u_c = dr(u_g), dr(u_c)
    if u_c <= u_g:
        return u_g
    return u_g + u_c + u_g * u_c


def lambda_k(phi, u_prime_value):
    phi = dr(phi)
    if phi < 0:
        raise ValueError("phi must be nonnegative")
    return dr(u_prime_value) * (phi + 1)


def phi_bound(norm_x_fl: TaggedValue, norm_s_fl: TaggedValue, u_x, u_g, n: int,
              formula: GammaFormula | str = GammaFormula.NU):
    """Guaranteed upper bound on ``||x|| / ||s||`` from the two computed norms.

    The quotient is computed in the higher of the two norm formats; if it
    overflows there it is recomputed in double, whose rounding unit never
    exceeds ``u_g``.
    """
    if norm_s_fl.value == 0.0:
        raise DegenerateStep("zero step norm")
    b_g = beta_n(n + 2, u_g, formula)
    if b_g >= 1:
        raise InvalidDimension("beta_{n+2}(u_g) >= 1")
    try:
        ratio = fp_op(norm_x_fl, norm_s_fl, "/").value
    except FpOverflow:
        ratio = fp_op(TaggedValue(norm_x_fl.value, DOUBLE), TaggedValue(norm_s_fl.value, DOUBLE), "/").value
    b_x = beta_n(n + 2, u_x, formula)
    return dr(ratio) * (1 + b_x) / (1 - b_g) * (1 + dr(u_g))


@dataclass(frozen=True)
class FormatBounds:
    u: object
    gamma_n: object
    gamma_n1: object
    gamma_n2: object
    beta_n2: object
    alpha_n1: object


@dataclass(frozen=True)
class ErrorContext:
    """Per-format constants for one problem dimension.

    Construction enforces ``gamma_{n+2}(u_max) < 1`` for the least precise format.
    """

    n: int
    formula: GammaFormula = GammaFormula.NU
    formats: Sequence[FpFormat] = ()
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "formula", GammaFormula.parse(self.formula))
        if self.n < 1:
            raise InvalidDimension(f"dimension {self.n} < 1")
        for fmt in self.formats:
            self._cache[fmt.precision] = self._compute(fmt.u)
        if self.formats:
            u_max = max((f.u for f in self.formats))
            try:
                g = gamma_n(self.n + 2, u_max, self.formula)
            except InvalidDimension as exc:
                raise InvalidDimension(f"assumption gamma_(n+2)(u_max) < 1 fails for n={self.n}") from exc
            if g >= 1:
                raise InvalidDimension(f"assumption gamma_(n+2)(u_max) < 1 fails for n={self.n}")

    def _compute(self, u) -> FormatBounds:
        n, f = self.n, self.formula
        g2 = gamma_n(n + 2, u, f)
        return FormatBounds(
            u=dr(u),
            gamma_n=gamma_n(n, u, f),
            gamma_n1=gamma_n(n + 1, u, f),
            gamma_n2=g2,
            beta_n2=beta_from_gamma(g2),
            alpha_n1=alpha_n(n, u, f),
        )

    def at(self, fmt_or_u) -> FormatBounds:
        if isinstance(fmt_or_u, FpFormat):
            key = fmt_or_u.precision
            if key not in self._cache:
                self._cache[key] = self._compute(fmt_or_u.u)
            return self._cache[key]
        u = dr(fmt_or_u)
        key = ("u", u)
        if key not in self._cache:
            self._cache[key] = self._compute(u)
        return self._cache[key]


def mu_k(ctx: ErrorContext, u_g, omega_g, lam):
    """Aggregate gradient-noise coefficient.

    Evaluated term by term in the displayed order:
    ``(a*w*(1+l) + a*l + u_g + g*a) / (1 - u_g)`` with ``a = alpha_{n+1}(u_g)``
    and ``g = gamma_{n+1}(u_g)``.
    """
    b = ctx.at(u_g)
    u = b.u
    a, g = b.alpha_n1, b.gamma_n1
    omega_g, lam = dr(omega_g), dr(lam)
    num = a * omega_g * (1 + lam)
    num = num + a * lam
    num = num + u
    num = num + g * a
    return num / (1 - u)


def gamma_rho(u, formula: GammaFormula | str = GammaFormula.NU):
    """``gamma_2(u)`` used by the finite-precision acceptance-ratio correction."""
    return gamma_n(2, u, formula)


__all__ = [
    "GammaFormula", "gamma_n", "beta_n", "beta_from_gamma", "alpha_n", "u_prime", "lambda_k",
    "phi_bound", "mu_k", "ErrorContext", "FormatBounds", "gamma_rho", "ONE", "ZERO",
]
