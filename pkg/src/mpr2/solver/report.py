"""Run results, evaluation counters and the JSON-lines iteration trace."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Optional

FIRST_ORDER, MAX_ITER, PRECISION_FAILURE, STALLED = "FirstOrder", "MaxIter", "PrecisionFailure", "Stalled"
STATUSES = (FIRST_ORDER, MAX_ITER, PRECISION_FAILURE, STALLED)

# trace record keys, in output order
TRACE_FIELDS = ("k", "pi_x", "pi_g", "pi_c", "pi_f", "sigma", "gnorm", "dT", "mu", "rho", "accepted", "flags")


class EvalCounters:
    """Per-format evaluation totals and successes for objective and gradient."""

    KINDS = ("obj", "grad")

    def __init__(self):
        self._c: dict[tuple[str, str], list[int]] = {}

    def _slot(self, kind: str, fmt: str) -> list[int]:
        if kind not in self.KINDS:
            raise ValueError(kind)
        return self._c.setdefault((kind, fmt), [0, 0])

    def record(self, kind: str, fmt: str, success: bool = False):
        s = self._slot(kind, fmt)
        s[0] += 1
        if success:
            s[1] += 1

    def succeed(self, kind: str, fmt: str):
        s = self._slot(kind, fmt)
        if s[1] >= s[0]:
            raise AssertionError("more successes than evaluations")
        s[1] += 1

    def total(self, kind: str, fmt: Optional[str] = None) -> int:
        return sum(v[0] for (k, f), v in self._c.items() if k == kind and (fmt is None or f == fmt))

    def successes(self, kind: str, fmt: Optional[str] = None) -> int:
        return sum(v[1] for (k, f), v in self._c.items() if k == kind and (fmt is None or f == fmt))

    def formats(self) -> list[str]:
        return sorted({f for (_, f) in self._c})

    def merge(self, other: "EvalCounters") -> "EvalCounters":
        out = EvalCounters()
        for src in (self, other):
            for key, (t, s) in src._c.items():
                slot = out._c.setdefault(key, [0, 0])
                slot[0] += t
                slot[1] += s
        return out

    def to_dict(self) -> dict:
        out: dict = {}
        for (kind, fmt), (t, s) in sorted(self._c.items()):
            out.setdefault(kind, {})[fmt] = {"total": t, "success": s}
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "EvalCounters":
        c = cls()
        for kind, per in d.items():
            for fmt, v in per.items():
                c._c[(kind, fmt)] = [int(v["total"]), int(v["success"])]
        return c

    def __eq__(self, other):
        return isinstance(other, EvalCounters) and self.to_dict() == other.to_dict()

    def __repr__(self):
        return f"EvalCounters({self.to_dict()})"


@dataclass
class RunReport:
    problem: str
    n: int
    solver: str
    status: str
    iterations: int
    successful: int
    x: list
    x_format: str
    f: float
    gnorm: float
    counters: EvalCounters
    trace: list = field(default_factory=list)
    violations: list = field(default_factory=list)
    message: str = ""
    extras: dict = field(default_factory=dict)
    iterates: list = field(default_factory=list)

    @property
    def solved(self) -> bool:
        return self.status == FIRST_ORDER

    def to_dict(self, with_trace: bool = False) -> dict:
        d = {
            "problem": self.problem,
            "n": self.n,
            "solver": self.solver,
            "status": self.status,
            "iterations": self.iterations,
            "successful": self.successful,
            "x": list(self.x),
            "x_format": self.x_format,
            "f": self.f,
            "gnorm": self.gnorm,
            "counters": self.counters.to_dict(),
            "violations": list(self.violations),
            "message": self.message,
            "extras": self.extras,
        }
        if with_trace:
            d["trace"] = self.trace
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RunReport":
        return cls(
            problem=d["problem"], n=d["n"], solver=d["solver"], status=d["status"],
            iterations=d["iterations"], successful=d["successful"], x=d["x"], x_format=d["x_format"],
            f=d["f"], gnorm=d["gnorm"], counters=EvalCounters.from_dict(d["counters"]),
            trace=d.get("trace", []), violations=d.get("violations", []), message=d.get("message", ""),
            extras=d.get("extras", {}),
        )


def _jsonable(v: Any):
    if v is None or isinstance(v, (bool, int, str)):
        return v
    try:
        return float(v)
    except (TypeError, ValueError):
        return str(v)


def trace_record(**values) -> dict:
    rec = {k: _jsonable(values.get(k)) for k in TRACE_FIELDS if k != "flags"}
    rec["flags"] = list(values.get("flags") or [])
    return rec


def write_trace(trace: list[dict], path) -> None:
    with open(path, "w") as fh:
        for rec in trace:
            fh.write(json.dumps(rec) + "\n")


__all__ = ["EvalCounters", "RunReport", "STATUSES", "FIRST_ORDER", "MAX_ITER", "PRECISION_FAILURE",
           "STALLED", "TRACE_FIELDS", "trace_record", "write_trace"]
