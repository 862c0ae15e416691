"""
Entropic Optimal Transport - Log-domain Sinkhorn iterations and the debiased divergence
"""

import logging
from dataclasses import dataclass
from typing import Any, Optional, Tuple

import numpy as np

from diffmath.errors import ConfigError, ContractError, NumericError, ShapeError
from diffmath.rng import Rng
from diffmath.tensor import Tensor, as_tensor, expand_dims, logsumexp, pairwise_distance, stop_gradient

logger = logging.getLogger(__name__)

DEFAULT_EPSILON = 0.0025
DEFAULT_ITERS = 200
DEFAULT_TOL = 1e-6


@dataclass
class PointCloud:
    """Weighted empirical measure; points (..., K, d), weights (..., K)"""

    points: Tensor
    weights: np.ndarray

    def __post_init__(self):
        self.points = as_tensor(self.points)
        self.weights = np.asarray(self.weights, dtype=np.float64)
        if self.points.ndim < 2 or self.points.shape[-2] < 1:
            raise ShapeError(f"Point cloud needs (..., K, d) points with K >= 1, got {list(self.points.shape)}")
        if self.weights.shape != self.points.shape[:-1]:
            raise ShapeError(f"Weights {list(self.weights.shape)} do not match points {list(self.points.shape)}")
        if np.any(self.weights < 0) or not np.allclose(self.weights.sum(axis=-1), 1.0, atol=1e-9):
            raise ContractError("Point cloud weights must be nonnegative and sum to 1")

    @classmethod
    def uniform(cls, points: Any) -> "PointCloud":
        points = as_tensor(points)
        k = points.shape[-2]
        return cls(points, np.full(points.shape[:-1], 1.0 / k))

    @property
    def size(self) -> int:
        return self.points.shape[-2]

    @property
    def dim(self) -> int:
        return self.points.shape[-1]


@dataclass
class SinkhornResult:
    """Dual value and potentials at the last executed iteration"""

    value: Tensor
    f: Tensor
    g: Tensor
    iterations: int
    converged: bool


def sample_prior(prior: str, K: int, d: int, rng: Rng, batch_shape: Tuple[int, ...] = ()) -> PointCloud:
    """Fresh uniform-weight draws from U(0,1)^d or N(0, I)"""
    shape = tuple(batch_shape) + (K, d)
    if prior == "uniform":
        points = rng.draw("uniform01", shape)
    elif prior == "gaussian":
        points = rng.draw("standard_normal", shape)
    else:
        raise ConfigError(f"Unknown prior '{prior}'")
    return PointCloud.uniform(points)


def _softmin(epsilon: float, cost: Tensor, log_weights: np.ndarray, potential: Tensor, axis: int) -> Tensor:
    """-eps * log sum_k w_k exp((h_k - C)/eps), reducing over ``axis`` of the cost"""
    if axis == -1:
        shifted = expand_dims(potential, -2) - cost
        weights = np.expand_dims(log_weights, -2)
    else:
        shifted = expand_dims(potential, -1) - cost
        weights = np.expand_dims(log_weights, -1)
    return -epsilon * logsumexp(shifted * (1.0 / epsilon) + weights, axis=axis)


def _weighted_sum(weights: np.ndarray, potential: Tensor) -> Tensor:
    return (potential * weights).sum(axis=-1)


def solve_sinkhorn(
    a: PointCloud,
    b: PointCloud,
    epsilon: float = DEFAULT_EPSILON,
    max_iters: int = DEFAULT_ITERS,
    tol: float = DEFAULT_TOL,
    gradient: str = "unroll",
) -> SinkhornResult:
    """
    Symmetric log-domain Sinkhorn on the cost C(x, y) = |x - y|^2 / 2

    Each iteration averages the current potentials with their softmin updates and
    stops once the largest potential change drops below ``tol``. With
    gradient='unroll' every executed iteration is differentiated; with
    'envelope' the iterations run on detached costs and one final taped update
    from the fixed point carries the gradient. Batched clouds share one
    iteration count. No logging; see entropic_ot.
    """
    if epsilon <= 0:
        raise ConfigError(f"epsilon must be > 0, got {epsilon}")
    if a.dim != b.dim or a.points.shape[:-2] != b.points.shape[:-2]:
        raise ShapeError(f"Point clouds {list(a.points.shape)} and {list(b.points.shape)} are incompatible")
    if gradient not in ("unroll", "envelope"):
        raise ConfigError(f"Unknown Sinkhorn gradient mode '{gradient}'")

    log_a = np.log(np.maximum(a.weights, 1e-300))
    log_b = np.log(np.maximum(b.weights, 1e-300))
    cost = 0.5 * pairwise_distance(a.points, b.points, exponent=2)
    loop_cost = cost if gradient == "unroll" else stop_gradient(cost)

    f = Tensor(np.zeros(a.weights.shape))
    g = Tensor(np.zeros(b.weights.shape))
    converged = False
    iterations = 0
    for iterations in range(1, max_iters + 1):
        f_next = 0.5 * (f + _softmin(epsilon, loop_cost, log_b, g, axis=-1))
        g_next = 0.5 * (g + _softmin(epsilon, loop_cost, log_a, f, axis=-2))
        change = max(np.max(np.abs(f_next.values - f.values)), np.max(np.abs(g_next.values - g.values)))
        f, g = f_next, g_next
        if not np.isfinite(change):
            raise NumericError(f"Sinkhorn potentials became non-finite at iteration {iterations}")
        if change < tol:
            converged = True
            break

    if gradient == "envelope":
        g = stop_gradient(g)
        f = _softmin(epsilon, cost, log_b, g, axis=-1)
    value = _weighted_sum(a.weights, f) + _weighted_sum(b.weights, g)
    return SinkhornResult(value=value, f=f, g=g, iterations=iterations, converged=converged)


def entropic_ot(
    a: PointCloud,
    b: PointCloud,
    epsilon: float = DEFAULT_EPSILON,
    max_iters: int = DEFAULT_ITERS,
    tol: float = DEFAULT_TOL,
    gradient: str = "unroll",
) -> SinkhornResult:
    """
    Entropy-regularized transport cost between two point clouds

    Args:
        a: Source cloud
        b: Target cloud
        epsilon: Entropic strength
        max_iters: Iteration cap
        tol: Stop when the largest potential change is below this value
        gradient: 'unroll' or 'envelope'

    Returns:
        SinkhornResult; converged is False when the cap was reached
    """
    result = solve_sinkhorn(a, b, epsilon, max_iters, tol, gradient)
    if not result.converged:
        logger.warning(f"Sinkhorn did not converge within {max_iters} iterations (epsilon={epsilon})")
    return result


def sinkhorn_divergence(
    a: PointCloud,
    b: PointCloud,
    epsilon: float = DEFAULT_EPSILON,
    max_iters: int = DEFAULT_ITERS,
    tol: float = DEFAULT_TOL,
    gradient: str = "unroll",
    warn: bool = True,
) -> Tensor:
    """Debiased divergence W(a, b) - (W(a, a) + W(b, b)) / 2"""
    return divergence_with_status(a, b, epsilon, max_iters, tol, gradient, warn)[0]


def divergence_with_status(
    a: PointCloud,
    b: PointCloud,
    epsilon: float = DEFAULT_EPSILON,
    max_iters: int = DEFAULT_ITERS,
    tol: float = DEFAULT_TOL,
    gradient: str = "unroll",
    warn: bool = True,
) -> Tuple[Tensor, bool]:
    solve = entropic_ot if warn else solve_sinkhorn
    cross = solve(a, b, epsilon, max_iters, tol, gradient)
    self_a = solve(a, a, epsilon, max_iters, tol, gradient)
    self_b = solve(b, b, epsilon, max_iters, tol, gradient)
    value = cross.value - 0.5 * (self_a.value + self_b.value)
    return value, cross.converged and self_a.converged and self_b.converged
