"""
Scoring Rules - Energy Score, Gaussian NLL, beta-NLL and RMSE
"""

import logging
import math
from typing import Any, Optional

import numpy as np

from diffmath.errors import ConfigError, ContractError, DomainError, ShapeError
from diffmath.rng import Rng
from diffmath.tensor import Tensor, as_tensor, expand_dims, log, norm, pairwise_distance, stop_gradient

logger = logging.getLogger(__name__)

LOG_2PI = math.log(2.0 * math.pi)


def _check_sample_shapes(samples: Tensor, targets: Tensor):
    if samples.ndim != 3 or targets.ndim != 2:
        raise ShapeError(f"Expected samples N x M x d and targets N x d, got {list(samples.shape)} and {list(targets.shape)}")
    if samples.shape[0] != targets.shape[0] or samples.shape[2] != targets.shape[1]:
        raise ShapeError(f"Samples {list(samples.shape)} do not match targets {list(targets.shape)}")


def _energy_terms(samples: Tensor, targets: Tensor) -> Tensor:
    """Per-set energy score for samples (..., M, d) against targets (..., d)"""
    m = samples.shape[-2]
    accuracy = norm(samples - expand_dims(targets, -2), axis=-1).mean(axis=-1)
    spread = pairwise_distance(samples, samples, exponent=1).sum(axis=(-2, -1)) / (2.0 * m * m)
    return accuracy - spread


def energy_score(samples: Any, targets: Any) -> Tensor:
    """
    Sample approximation of the Energy Score, averaged over inputs

    The pairwise term keeps the i == j zeros under the 1/(2M^2) normalization.

    Args:
        samples: N x M x d predicted samples
        targets: N x d observed targets

    Returns:
        Scalar Tensor
    """
    samples, targets = as_tensor(samples), as_tensor(targets)
    _check_sample_shapes(samples, targets)
    return _energy_terms(samples, targets).mean()


def gather_subsets(samples: Tensor, subsets: np.ndarray) -> Tensor:
    """Pick samples[n, subsets[n, l, :]] -> N x L x K x d"""
    n_inputs = samples.shape[0]
    rows = np.arange(n_inputs)[:, None, None]
    return samples[(rows, subsets)]


def minibatch_energy_score(
    samples: Any,
    targets: Any,
    K: int,
    L: int,
    rng: Optional[Rng] = None,
    subsets: Optional[np.ndarray] = None,
) -> Tensor:
    """
    Energy Score averaged over L random size-K subsets per input

    Args:
        samples: N x M x d predicted samples
        targets: N x d observed targets
        K: Subset size, 1 <= K <= M
        L: Repetitions per input
        rng: Stream used to draw the subsets
        subsets: Explicit N x L x K index array, overrides rng

    Returns:
        Scalar Tensor normalized by 1/(N*L)
    """
    samples, targets = as_tensor(samples), as_tensor(targets)
    _check_sample_shapes(samples, targets)
    n_inputs, m, _ = samples.shape
    if not 1 <= K <= m:
        raise ConfigError(f"Minibatch size K={K} must satisfy 1 <= K <= M={m}")
    if L < 1:
        raise ConfigError(f"Repetitions L must be >= 1, got {L}")
    if subsets is None:
        if rng is None:
            raise ContractError("minibatch_energy_score needs an rng or explicit subsets")
        subsets = rng.subsets(n_inputs, m, K, L)
    subsets = np.asarray(subsets, dtype=np.int64)
    if subsets.shape[0] != n_inputs or subsets.ndim != 3:
        raise ShapeError(f"Subsets must be N x L x K, got {list(subsets.shape)}")

    picked = gather_subsets(samples, subsets)
    return _energy_terms(picked, expand_dims(targets, 1)).mean()


def _check_gaussian(mean: Tensor, var: Tensor, targets: Tensor):
    if not (mean.shape == var.shape == targets.shape) or mean.ndim != 2:
        raise ShapeError(
            f"mean, var and targets must share an N x d shape, got {list(mean.shape)}, {list(var.shape)}, {list(targets.shape)}"
        )
    if np.any(var.values <= 0):
        raise DomainError("Gaussian variance must be strictly positive")


def _elementwise_nll(mean: Tensor, var: Tensor, targets: Tensor) -> Tensor:
    residual = targets - mean
    return 0.5 * (LOG_2PI + log(var)) + residual * residual / (2.0 * var)


def gaussian_nll(mean: Any, var: Any, targets: Any) -> Tensor:
    """
    Negative log-likelihood of a fully factored Gaussian

    Summed over output dimensions, averaged over inputs.
    """
    mean, var, targets = as_tensor(mean), as_tensor(var), as_tensor(targets)
    _check_gaussian(mean, var, targets)
    return _elementwise_nll(mean, var, targets).sum(axis=-1).mean()


def beta_nll(mean: Any, var: Any, targets: Any, beta: float) -> Tensor:
    """
    NLL weighted per dimension by var^beta, the weight carrying no gradient

    beta = 0 reproduces gaussian_nll exactly.
    """
    if not 0.0 <= beta <= 1.0:
        raise ConfigError(f"beta must lie in [0, 1], got {beta}")
    mean, var, targets = as_tensor(mean), as_tensor(var), as_tensor(targets)
    _check_gaussian(mean, var, targets)
    elementwise = _elementwise_nll(mean, var, targets)
    if beta == 0.0:
        return elementwise.sum(axis=-1).mean()
    weight = stop_gradient(var) ** beta
    return (weight * elementwise).sum(axis=-1).mean()


def rmse(point_predictions: Any, targets: Any) -> float:
    """Root mean squared error over all inputs and output dimensions"""
    predictions = np.asarray(as_tensor(point_predictions).values)
    observed = np.asarray(as_tensor(targets).values)
    if predictions.shape != observed.shape:
        raise ShapeError(f"Predictions {list(predictions.shape)} do not match targets {list(observed.shape)}")
    return float(np.sqrt(np.mean((predictions - observed) ** 2)))


def gaussian_samples(mean: Any, var: Any, M: int, rng: Rng) -> Tensor:
    """Draw M samples per input from N(mean, var) -> N x M x d"""
    mean_values = as_tensor(mean).values
    std = np.sqrt(as_tensor(var).values)
    n_inputs, dims = mean_values.shape
    noise = rng.draw("standard_normal", (n_inputs, M, dims)).values
    return Tensor(mean_values[:, None, :] + std[:, None, :] * noise)
