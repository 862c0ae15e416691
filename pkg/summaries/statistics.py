"""
Sample Statistics - Moments and empirical quantile intervals of predicted sample sets
"""

import logging
from typing import Any, Tuple

import numpy as np

from diffmath.errors import ContractError
from diffmath.tensor import Tensor

logger = logging.getLogger(__name__)

VARIANCE_FLOOR = 1e-8


def _as_array(samples: Any) -> np.ndarray:
    if isinstance(samples, Tensor):
        return samples.values
    return np.asarray(samples, dtype=np.float64)


def _check_level(level: float):
    if not 0.0 < level < 1.0:
        raise ContractError(f"Coverage level must lie in (0, 1), got {level}")


def sample_moments(samples: Any, floor: float = VARIANCE_FLOOR) -> Tuple[np.ndarray, np.ndarray]:
    """
    Per-dimension mean and unbiased variance over the sample axis

    Args:
        samples: (..., M, d) sample sets, M >= 2
        floor: lower bound applied to the variance

    Returns:
        (mean, var), each shaped (..., d)
    """
    values = _as_array(samples)
    if values.ndim < 2:
        raise ContractError(f"Samples must be (..., M, d), got shape {list(values.shape)}")
    M = values.shape[-2]
    if M < 2:
        raise ContractError(f"Need at least 2 samples for a variance, got M={M}")
    mean = values.mean(axis=-2)
    var = np.maximum(values.var(axis=-2, ddof=1), floor)
    return mean, var


def sample_mean(samples: Any) -> np.ndarray:
    """Point prediction of a sample set, (..., M, d) -> (..., d)"""
    return _as_array(samples).mean(axis=-2)


def _flat_samples(samples: Any, minimum: int) -> np.ndarray:
    values = _as_array(samples)
    if values.ndim == 2 and values.shape[1] == 1:
        values = values[:, 0]
    if values.ndim != 1:
        raise ContractError(f"Expected M or M x 1 samples, got shape {list(values.shape)}")
    if values.size < minimum:
        raise ContractError(f"Need at least {minimum} samples, got {values.size}")
    return values


def central_interval(samples: Any, level: float) -> Tuple[float, float]:
    """Equal-tailed interval from linearly interpolated empirical quantiles"""
    _check_level(level)
    values = _flat_samples(samples, 2)
    lo, hi = np.quantile(values, [(1.0 - level) / 2.0, (1.0 + level) / 2.0], method="linear")
    return float(lo), float(hi)
