"""
Sample Normalization - Map predicted sample sets onto the scale of a standard prior
"""

import logging
from typing import Any, Tuple

import numpy as np

from diffmath.errors import ConfigError, ShapeError
from diffmath.tensor import Tensor, as_tensor, sqrt

logger = logging.getLogger(__name__)

STD_FLOOR = 1e-8


def normalize_samples(samples: Any, prior: str) -> Tuple[Tensor, np.ndarray]:
    """
    Normalize each output dimension of a sample set using its own statistics

    Uniform prior: min-max map onto [0, 1]. Gaussian prior: subtract the mean and
    divide by the population standard deviation. Statistics stay on the tape, so
    gradients flow through them. Dimensions with zero range (or std below
    STD_FLOOR) are mapped to zeros and flagged.

    Args:
        samples: Sample set of shape (..., M, d)
        prior: 'uniform' or 'gaussian'

    Returns:
        Normalized samples of the same shape and a boolean (..., d) degenerate mask
    """
    samples = as_tensor(samples)
    if samples.ndim < 2:
        raise ShapeError(f"normalize_samples needs (..., M, d), got {list(samples.shape)}")

    if prior == "uniform":
        low = samples.min(axis=-2, keepdims=True)
        high = samples.max(axis=-2, keepdims=True)
        degenerate = (high.values - low.values) <= 0.0
        span = high - low + Tensor(degenerate.astype(np.float64))
        normalized = (samples - low) / span
    elif prior == "gaussian":
        center = samples.mean(axis=-2, keepdims=True)
        centered = samples - center
        variance = (centered * centered).mean(axis=-2, keepdims=True)
        degenerate = np.sqrt(variance.values) < STD_FLOOR
        std = sqrt(variance + Tensor(degenerate.astype(np.float64)))
        normalized = centered / std
    else:
        raise ConfigError(f"Unknown prior '{prior}'")

    if np.any(degenerate):
        normalized = normalized * Tensor((~degenerate).astype(np.float64))
    return normalized, np.squeeze(degenerate, axis=-2)
