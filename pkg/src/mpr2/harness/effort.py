"""Analytic time and energy cost of evaluations in each format.

An evaluation in a ``b``-bit format costs ``b/64`` units of time and
``(b/64)^2`` units of energy relative to the same evaluation in double
precision.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from ..errors import EmptyIntersection
from ..fpenv import KNOWN_FORMATS
from ..solver.report import EvalCounters


@dataclass(frozen=True)
class EffortModel:
    reference_bits: int = 64

    def bits(self, fmt: str) -> int:
        return KNOWN_FORMATS[fmt.lower()].bits

    def time_weight(self, fmt: str) -> Fraction:
        return Fraction(self.bits(fmt), self.reference_bits)

    def energy_weight(self, fmt: str) -> Fraction:
        return self.time_weight(fmt) ** 2

    def cost(self, counters: EvalCounters, kind: str) -> tuple[Fraction, Fraction]:
        """(time, energy) spent on all ``kind`` evaluations in ``counters``."""
        t = e = Fraction(0)
        for fmt in counters.formats():
            c = counters.total(kind, fmt)
            t += c * self.time_weight(fmt)
            e += c * self.energy_weight(fmt)
        return t, e


@dataclass(frozen=True)
class EffortRatios:
    obj_time: Fraction
    obj_energy: Fraction
    grad_time: Fraction
    grad_energy: Fraction

    def as_dict(self) -> dict:
        return {k: float(v) for k, v in self.__dict__.items()}


def effort_ratios(mp_counters: EvalCounters, baseline_counters: EvalCounters,
                  model: EffortModel | None = None) -> EffortRatios:
    """Cost of ``mp_counters`` divided by the baseline cost, per evaluation kind.

    The baseline is charged one unit per evaluation regardless of format, i.e.
    it is taken to run entirely in the reference format.
    """
    model = model or EffortModel()
    out = {}
    for kind in EvalCounters.KINDS:
        base = baseline_counters.total(kind)
        if base == 0:
            raise EmptyIntersection(f"baseline has no {kind} evaluations")
        t, e = model.cost(mp_counters, kind)
        out[f"{kind}_time"] = t / base
        out[f"{kind}_energy"] = e / base
    return EffortRatios(**out)


__all__ = ["EffortModel", "EffortRatios", "effort_ratios"]
