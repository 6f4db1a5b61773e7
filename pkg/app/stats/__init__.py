from .ensemble import build_kernel_config, run_ensemble, run_replica, trace_random
from .analysis import (
    gqf_fit,
    gqf_sample,
    global_fluctuation_report,
    lilliefors_critical_value,
    localized_clt,
    merge_summaries,
    scaling_exponents,
    slln_report,
    slope_fit,
    summarize,
)
from .ergodic import bracket_average, correlation_decay, double_average_check, remark_counterexample

__all__ = [
    "build_kernel_config",
    "run_ensemble",
    "run_replica",
    "trace_random",
    "gqf_fit",
    "gqf_sample",
    "global_fluctuation_report",
    "lilliefors_critical_value",
    "localized_clt",
    "merge_summaries",
    "scaling_exponents",
    "slln_report",
    "slope_fit",
    "summarize",
    "bracket_average",
    "correlation_decay",
    "double_average_check",
    "remark_counterexample"
]
