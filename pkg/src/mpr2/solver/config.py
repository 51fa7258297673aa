"""Solver parameters, validation and the flat ``key = value`` config format."""

from __future__ import annotations

import dataclasses
import warnings
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Mapping

from ..errbounds import GammaFormula
from ..errors import InvalidConfig
from ..fpenv import KNOWN_FORMATS, make_stack

F = Fraction

R2, MPR2_GUARANTEED, MPR2_RELAXED = "r2", "mpr2_guaranteed", "mpr2_relaxed"
SOLVER_MODES = (R2, MPR2_GUARANTEED, MPR2_RELAXED)
_MODE_ALIASES = {
    "r2": R2,
    "mpr2": MPR2_GUARANTEED,
    "guaranteed": MPR2_GUARANTEED,
    "mpr2_guaranteed": MPR2_GUARANTEED,
    "relaxed": MPR2_RELAXED,
    "mpr2_relaxed": MPR2_RELAXED,
    "mpr2-e": MPR2_RELAXED,
    "mpr2e": MPR2_RELAXED,
}


class EqualityWarning(UserWarning):
    """A strict parameter inequality holds only with equality."""


def parse_mode(name: str) -> str:
    try:
        return _MODE_ALIASES[name.strip().lower()]
    except KeyError:
        raise InvalidConfig(f"unknown solver mode {name!r}; choose one of {', '.join(SOLVER_MODES)}") from None


def _is_power_of_two(q: Fraction) -> bool:
    q = F(q)
    if q <= 0:
        return False
    n, d = q.numerator, q.denominator
    return (n & (n - 1)) == 0 and (d & (d - 1)) == 0


@dataclass(frozen=True)
class SolverConfig:
    mode: str = MPR2_GUARANTEED
    eta0: Fraction = F(1, 20)
    eta1: Fraction = F(1, 10)
    eta2: Fraction = F(7, 10)
    gamma1: Fraction = F(1, 2)
    gamma2: Fraction = F(2)
    gamma3: Fraction = F(2)
    kappa_mu: Fraction = F(1, 5)
    sigma0: Fraction = F(1)
    sigma_min: Fraction = F(1, 2**10)
    eps: Fraction = F(1.5e-8)
    max_iter: int = 10_000
    relax_a: Fraction = F(1)
    gamma_formula: GammaFormula = GammaFormula.NU
    rho_correction: bool = False
    formats: tuple = ("half", "single", "double")
    # "none" disables every finite-precision error source (zero bounds and
    # zero unit roundoffs in the defined values); None follows the mode.
    error_model: str | None = None
    allow_gamma2_one: bool = False
    check_invariants: bool = False
    trace: bool = True
    record_iterates: bool = False

    def __post_init__(self):
        set_ = lambda k, v: object.__setattr__(self, k, v)  # noqa: E731
        set_("mode", parse_mode(self.mode))
        for name in ("eta0", "eta1", "eta2", "gamma1", "gamma2", "gamma3", "kappa_mu", "sigma0",
                     "sigma_min", "eps", "relax_a"):
            try:
                set_(name, _to_fraction(getattr(self, name)))
            except (ValueError, TypeError, ZeroDivisionError) as exc:
                raise InvalidConfig(f"{name}: {exc}") from None
        try:
            set_("gamma_formula", GammaFormula.parse(self.gamma_formula))
        except ValueError as exc:
            raise InvalidConfig(str(exc)) from None
        fmts = self.formats
        if isinstance(fmts, str):
            fmts = [f.strip() for f in fmts.split(",") if f.strip()]
        names = []
        for f in fmts:
            name = f if isinstance(f, str) else f.name
            if name.lower() not in KNOWN_FORMATS:
                raise InvalidConfig(f"unknown format {name!r}")
            names.append(KNOWN_FORMATS[name.lower()].name)
        set_("formats", tuple(names))
        if self.error_model not in (None, "none", "guaranteed", "relaxed"):
            raise InvalidConfig(f"unknown error model {self.error_model!r}")
        if isinstance(self.max_iter, bool) or not isinstance(self.max_iter, int):
            try:
                set_("max_iter", int(self.max_iter))
            except (TypeError, ValueError):
                raise InvalidConfig("max_iter must be an integer") from None

    @property
    def stack(self):
        try:
            return make_stack(self.formats)
        except ValueError as exc:
            raise InvalidConfig(str(exc)) from None

    @property
    def evaluation_mode(self) -> str:
        if self.error_model is not None:
            return self.error_model
        return {MPR2_GUARANTEED: "guaranteed", MPR2_RELAXED: "relaxed", R2: "none"}[self.mode]

    @property
    def relaxed(self) -> bool:
        return self.mode == MPR2_RELAXED

    def replace(self, **changes) -> "SolverConfig":
        return dataclasses.replace(self, **changes)

    def as_dict(self) -> dict:
        out = {}
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if isinstance(v, Fraction):
                v = str(v)
            elif isinstance(v, GammaFormula):
                v = v.value
            elif isinstance(v, tuple):
                v = ",".join(v)
            out[f.name] = v
        return out


def _to_fraction(v) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, str):
        return F(v.strip())
    if isinstance(v, bool):
        raise TypeError("boolean is not a number")
    return F(v)


def validate_params(cfg: SolverConfig) -> list[str]:
    """Check the parameter inequalities; raise InvalidConfig naming the first violated one.

    Returns the list of warnings issued (strict inequalities met with equality).
    """
    notes = []
    e0, e1, e2 = cfg.eta0, cfg.eta1, cfg.eta2
    g1, g2, g3, k = cfg.gamma1, cfg.gamma2, cfg.gamma3, cfg.kappa_mu
    if not (0 < e1 <= e2 < 1):
        raise InvalidConfig(f"0 < eta1 <= eta2 < 1 violated (eta1={e1}, eta2={e2})")
    if not (0 < g1 < 1):
        raise InvalidConfig(f"0 < gamma1 < 1 violated (gamma1={g1})")
    if not (g2 <= g3):
        raise InvalidConfig(f"gamma2 <= gamma3 violated (gamma2={g2}, gamma3={g3})")
    if g2 == 1:
        if not cfg.allow_gamma2_one:
            raise InvalidConfig("1 < gamma2 violated (gamma2=1); set allow_gamma2_one to accept it")
        notes.append("gamma2 = 1 accepted by override")
    elif not (1 < g2):
        raise InvalidConfig(f"1 < gamma2 violated (gamma2={g2})")
    if e0 < 0:
        raise InvalidConfig(f"eta0 >= 0 violated (eta0={e0})")
    if e0 > e1 / 2:
        raise InvalidConfig(f"eta0 < eta1/2 violated (eta0={e0}, eta1={e1})")
    if e0 == e1 / 2:
        notes.append(f"eta0 = eta1/2 = {e0}: strict inequality eta0 < eta1/2 holds only with equality")
    if not (k > 0):
        raise InvalidConfig(f"kappa_mu > 0 violated (kappa_mu={k})")
    if e0 + k / 2 > (1 - e2) / 2:
        raise InvalidConfig(f"eta0 + kappa_mu/2 <= (1 - eta2)/2 violated ({e0 + k / 2} > {(1 - e2) / 2})")
    for name in ("sigma0", "sigma_min", "gamma1", "gamma3"):
        if not _is_power_of_two(getattr(cfg, name)):
            raise InvalidConfig(f"{name} must be a power of two, got {getattr(cfg, name)}")
    if cfg.sigma_min > cfg.sigma0:
        raise InvalidConfig("sigma_min <= sigma0 violated")
    if not (0 < cfg.relax_a <= 1):
        raise InvalidConfig(f"relax_a must lie in (0, 1], got {cfg.relax_a}")
    if not (cfg.eps > 0):
        raise InvalidConfig("eps must be positive")
    if cfg.max_iter < 0:
        raise InvalidConfig("max_iter must be non-negative")
    cfg.stack  # raises InvalidConfig on a bad stack
    for note in notes:
        warnings.warn(note, EqualityWarning, stacklevel=2)
    return notes


_BOOL = {"1": True, "true": True, "yes": True, "on": True, "0": False, "false": False, "no": False, "off": False}


def parse_config_text(text: str) -> dict:
    """Parse flat ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    fields = {f.name: f for f in dataclasses.fields(SolverConfig)}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidConfig(f"line {lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in fields:
            raise InvalidConfig(f"line {lineno}: unknown key {key!r}")
        out[key] = _coerce(key, value)
    return out


def _coerce(key: str, value: str):
    if key in ("rho_correction", "allow_gamma2_one", "check_invariants", "trace", "record_iterates"):
        try:
            return _BOOL[value.lower()]
        except KeyError:
            raise InvalidConfig(f"{key}: expected a boolean, got {value!r}") from None
    if key == "max_iter":
        try:
            return int(value)
        except ValueError:
            raise InvalidConfig(f"max_iter: expected an integer, got {value!r}") from None
    if key == "error_model" and value.lower() in ("", "default"):
        return None
    return value


def load_config(path: str | Path | None = None, overrides: Mapping | None = None) -> SolverConfig:
    """Config file values, then ``overrides`` (None values ignored)."""
    values = {}
    if path is not None:
        values.update(parse_config_text(Path(path).read_text()))
    for k, v in (overrides or {}).items():
        if v is not None:
            values[k] = v
    return SolverConfig(**values)


__all__ = [
    "SolverConfig", "validate_params", "load_config", "parse_config_text", "parse_mode",
    "R2", "MPR2_GUARANTEED", "MPR2_RELAXED", "SOLVER_MODES", "EqualityWarning",
]
