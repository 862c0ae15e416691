"""
Evaluation - Split metrics, aggregate reports and KS-based method comparison
"""

from .metrics import METRICS, MetricsRecord, evaluate_model
from .report import MetricsReport, aggregate, read_report, write_report
from .significance import KsResult, best_method, compare_methods, ks_two_sided, mark_top_performers

__all__ = [
    "KsResult",
    "METRICS",
    "MetricsRecord",
    "MetricsReport",
    "aggregate",
    "best_method",
    "compare_methods",
    "evaluate_model",
    "ks_two_sided",
    "mark_top_performers",
    "read_report",
    "write_report",
]
