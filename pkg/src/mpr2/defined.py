"""Extended-precision scalars for quantities treated as exact by the algorithm.

Every "defined" quantity (gamma, beta, alpha, mu, phi, rho, ...) lives in a
private 128-bit mpmath context.  The working formats top out at 53 bits, so a
128-bit significand leaves more than twice the finest working precision and
keeps per-operation relative error below 2**-127.
"""

from fractions import Fraction
from numbers import Rational

from mpmath.ctx_mp import MPContext

PRECISION = 128

_ctx = MPContext()
_ctx.prec = PRECISION

mpf = _ctx.mpf
DefinedReal = type(_ctx.mpf(0))

ZERO = _ctx.mpf(0)
ONE = _ctx.mpf(1)
INF = _ctx.inf


def dr(x):
    """Convert ``x`` (float, int, Fraction, decimal string or DefinedReal)."""
    if isinstance(x, DefinedReal):
        return x
    if isinstance(x, Rational) and not isinstance(x, int):
        return _ctx.mpf(x.numerator) / x.denominator
    return _ctx.mpf(x)


def sqrt(x):
    return _ctx.sqrt(dr(x))


def log(x):
    return _ctx.log(dr(x))


def to_fraction(x) -> Fraction:
    """Exact rational value of a float or DefinedReal."""
    if isinstance(x, DefinedReal):
        if not _ctx.isfinite(x):
            raise ValueError("non-finite defined value")
        man, exp = x.man_exp
        man = int(man)
        return Fraction(man * 2**exp) if exp >= 0 else Fraction(man, 2**-exp)
    return Fraction(x)


def is_finite(x) -> bool:
    return bool(_ctx.isfinite(dr(x)))
