from .experiment_handlers import ExperimentHandlers, aggregate_summaries, run_seeds, solve_seed
from .suite_handlers import SuiteHandlers, ablation_ordering, table1_configs
from .report_handlers import ReportHandlers, emit_rate_report, fit_rate, gap_series

__all__ = [
    "ExperimentHandlers",
    "SuiteHandlers",
    "ReportHandlers",
    "aggregate_summaries",
    "run_seeds",
    "solve_seed",
    "table1_configs",
    "ablation_ordering",
    "emit_rate_report",
    "fit_rate",
    "gap_series",
]
