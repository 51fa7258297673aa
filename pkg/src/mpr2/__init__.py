"""Multi-precision quadratic regularization.

The solver picks, at every iteration, the cheapest floating-point format for
the objective, the gradient and the step that still keeps enough accuracy for
the method to converge.  Formats are emulated, so half and single precision
run on any machine.
"""

from .errors import MPR2Error
from .fpenv import DEFAULT_STACK, DOUBLE, HALF, SINGLE, FpFormat, TaggedValue, TaggedVector, make_stack
from .problems import DEFAULT_SUITE, Problem, get_problem, problem_names
from .solver import RunReport, SolverConfig, load_config, run_mpr2, run_r2, solve

__version__ = "0.1.0"

__all__ = [
    "MPR2Error", "FpFormat", "TaggedValue", "TaggedVector", "HALF", "SINGLE", "DOUBLE", "DEFAULT_STACK",
    "make_stack", "Problem", "get_problem", "problem_names", "DEFAULT_SUITE", "SolverConfig",
    "load_config", "RunReport", "solve", "run_mpr2", "run_r2", "__version__",
]
