"""
HPD Intervals - Histogram-thresholded highest density regions and modes
"""

import logging
import math
from dataclasses import dataclass
from typing import Any, List, Optional, Tuple

import numpy as np

from diffmath.errors import ContractError

from .statistics import _check_level, _flat_samples

logger = logging.getLogger(__name__)

MIN_SAMPLES = 10


@dataclass
class IntervalSet:
    """Sorted, pairwise disjoint closed intervals for one output dimension"""

    intervals: List[Tuple[float, float]]
    level: float
    achieved_mass: float

    def __post_init__(self):
        _check_level(self.level)
        previous_hi = -math.inf
        for lo, hi in self.intervals:
            if lo > hi:
                raise ContractError(f"Interval [{lo}, {hi}] has lo > hi")
            if lo <= previous_hi:
                raise ContractError(f"Intervals must be sorted and disjoint, got {self.intervals}")
            previous_hi = hi

    @property
    def total_length(self) -> float:
        return float(sum(hi - lo for lo, hi in self.intervals))

    def contains(self, value: float) -> bool:
        return any(lo <= value <= hi for lo, hi in self.intervals)

    def to_dict(self):
        return {
            "intervals": [[lo, hi] for lo, hi in self.intervals],
            "level": self.level,
            "achieved_mass": self.achieved_mass,
        }


def default_bins(M: int) -> int:
    return int(math.ceil(math.sqrt(M)))


def _histogram(values: np.ndarray, bins: Optional[int]) -> Tuple[np.ndarray, np.ndarray]:
    bins = default_bins(values.size) if bins is None else int(bins)
    if bins < 1:
        raise ContractError(f"bins must be >= 1, got {bins}")
    return np.histogram(values, bins=bins, range=(values.min(), values.max()))


def hpd_intervals(samples: Any, level: float, bins: Optional[int] = None) -> IntervalSet:
    """
    Highest density intervals of a 1-D sample set

    Bins are taken in decreasing count order (ties to the lower bin) until the
    selected bins hold at least `level` of the samples; adjacent selected bins
    are merged into one interval.
    """
    _check_level(level)
    values = _flat_samples(samples, MIN_SAMPLES)
    lo, hi = float(values.min()), float(values.max())
    if lo == hi:
        return IntervalSet([(lo, hi)], level, 1.0)

    counts, edges = _histogram(values, bins)
    order = np.argsort(-counts, kind="stable")
    cumulative = np.cumsum(counts[order])
    needed = math.ceil(level * values.size)
    taken = int(np.searchsorted(cumulative, needed, side="left")) + 1
    selected = np.sort(order[:taken])

    intervals: List[Tuple[float, float]] = []
    start = previous = int(selected[0])
    for index in selected[1:]:
        index = int(index)
        if index != previous + 1:
            intervals.append((float(edges[start]), float(edges[previous + 1])))
            start = index
        previous = index
    intervals.append((float(edges[start]), float(edges[previous + 1])))

    achieved = float(cumulative[taken - 1]) / values.size
    logger.debug(f"HPD at level {level}: {len(intervals)} interval(s), achieved mass {achieved:.4f}")
    return IntervalSet(intervals, level, achieved)


def mode_estimate(samples: Any, bins: Optional[int] = None) -> float:
    """Center of the most populated histogram bin (ties to the lowest bin)"""
    values = _flat_samples(samples, MIN_SAMPLES)
    lo, hi = float(values.min()), float(values.max())
    if lo == hi:
        return lo
    counts, edges = _histogram(values, bins)
    peak = int(np.argmax(counts))
    return float(0.5 * (edges[peak] + edges[peak + 1]))
