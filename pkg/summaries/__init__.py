"""
Summaries - Moments, quantile intervals, HPD intervals and modes of sample sets
"""

from .intervals import IntervalSet, default_bins, hpd_intervals, mode_estimate
from .statistics import VARIANCE_FLOOR, central_interval, sample_mean, sample_moments

__all__ = [
    "IntervalSet",
    "VARIANCE_FLOOR",
    "central_interval",
    "default_bins",
    "hpd_intervals",
    "mode_estimate",
    "sample_mean",
    "sample_moments",
]
