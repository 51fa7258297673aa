"""Suite runs, effort accounting, performance profiles and report files."""

from .effort import EffortModel, EffortRatios, effort_ratios
from .profile import (
    PROFILE_COLUMNS,
    TAU_GRID,
    ProfileData,
    performance_profile,
    plot_profiles,
    read_profile_csv,
    write_profile_csv,
)
from .report import (
    EVAL_COLUMNS,
    PROFILE_METRICS,
    RUN_COLUMNS,
    SCHEMA,
    REPORT_FORMATS,
    emit_report,
    format_table,
    load_suite,
    profile_costs,
    suite_from_dict,
    suite_to_dict,
)
from .suite import Comparison, FormatShare, SuiteReport, parse_selection, run_suite, solver_label

__all__ = [
    "EffortModel", "EffortRatios", "effort_ratios", "ProfileData", "performance_profile", "plot_profiles",
    "read_profile_csv", "write_profile_csv", "TAU_GRID", "PROFILE_COLUMNS", "emit_report", "format_table",
    "load_suite", "profile_costs", "suite_from_dict", "suite_to_dict", "PROFILE_METRICS", "REPORT_FORMATS",
    "RUN_COLUMNS", "EVAL_COLUMNS", "SCHEMA",
    "Comparison", "FormatShare", "SuiteReport", "parse_selection", "run_suite", "solver_label",
]
