"""
Significance Testing - Two-sample Kolmogorov-Smirnov test and top-performer marking
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, Mapping, Sequence, Set

import numpy as np
from scipy.special import kolmogorov

from diffmath.errors import ContractError, ProtocolError

from .report import MetricsReport

logger = logging.getLogger(__name__)

SIGNIFICANCE = 0.05


@dataclass(frozen=True)
class KsResult:
    statistic: float
    pvalue: float
    n_a: int
    n_b: int

    def to_dict(self) -> Dict[str, float]:
        return {"statistic": self.statistic, "pvalue": self.pvalue, "n_a": self.n_a, "n_b": self.n_b}


def ks_two_sided(a: Sequence[float], b: Sequence[float]) -> KsResult:
    """
    Two-sided two-sample KS test

    D is the largest gap between the empirical CDFs over the pooled points; the
    p-value is the asymptotic Kolmogorov tail at sqrt(n_a n_b / (n_a + n_b)) * D.
    """
    a_sorted = np.sort(np.asarray(a, dtype=np.float64).ravel())
    b_sorted = np.sort(np.asarray(b, dtype=np.float64).ravel())
    n_a, n_b = a_sorted.size, b_sorted.size
    if n_a == 0 or n_b == 0:
        raise ContractError("ks_two_sided needs two nonempty samples")
    pooled = np.concatenate([a_sorted, b_sorted])
    cdf_a = np.searchsorted(a_sorted, pooled, side="right") / n_a
    cdf_b = np.searchsorted(b_sorted, pooled, side="right") / n_b
    statistic = float(np.max(np.abs(cdf_a - cdf_b)))
    effective = n_a * n_b / (n_a + n_b)
    pvalue = float(np.clip(kolmogorov(math.sqrt(effective) * statistic), 0.0, 1.0))
    return KsResult(statistic=statistic, pvalue=pvalue, n_a=int(n_a), n_b=int(n_b))


def best_method(reports: Mapping[str, MetricsReport], metric: str) -> str:
    """Lowest mean; ties resolve to the first name in sorted order"""
    return min(sorted(reports), key=lambda name: reports[name].mean(metric))


def compare_methods(reports: Mapping[str, MetricsReport], metric: str = "es") -> Dict[str, KsResult]:
    """KS result of every method against the best-mean method"""
    if not reports:
        raise ContractError("Need at least one report to compare")
    split_counts = {name: report.n_splits for name, report in reports.items()}
    if len(set(split_counts.values())) > 1:
        raise ProtocolError(f"Reports have mismatched split counts: {split_counts}")
    missing = [name for name, report in reports.items() if metric not in report.aggregates]
    if missing:
        raise ProtocolError(f"Reports {missing} carry no '{metric}' values")
    best = best_method(reports, metric)
    reference = reports[best].values(metric)
    return {name: ks_two_sided(report.values(metric), reference) for name, report in sorted(reports.items())}


def mark_top_performers(
    reports: Mapping[str, MetricsReport],
    metric: str = "es",
    significance: float = SIGNIFICANCE,
) -> Set[str]:
    """The best-mean method plus every method KS-indistinguishable from it (p > significance)"""
    results = compare_methods(reports, metric)
    best = best_method(reports, metric)
    marked = {best} | {name for name, result in results.items() if result.pvalue > significance}
    logger.info(f"Top performers on {metric}: {sorted(marked)} (best mean: {best})")
    return marked
