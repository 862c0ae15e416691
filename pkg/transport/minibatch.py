"""
Minibatch Sinkhorn Regularizer - Subsampled divergence between normalized samples and a prior
"""

import logging
from dataclasses import asdict, dataclass
from typing import Any, Dict, Optional

import numpy as np

from diffmath.errors import ConfigError, ShapeError
from diffmath.rng import Rng
from diffmath.tensor import Tensor, as_tensor
from scoring.config import LossConfig
from scoring.rules import gather_subsets

from .normalization import normalize_samples
from .sinkhorn import PointCloud, divergence_with_status, sample_prior

logger = logging.getLogger(__name__)


@dataclass
class TransportStats:
    """Counters accumulated across regularizer evaluations"""

    evaluations: int = 0
    divergences: int = 0
    degenerate_skipped: int = 0
    nonconverged: int = 0

    def to_dict(self) -> Dict[str, int]:
        return asdict(self)


def minibatch_sinkhorn(
    samples: Any,
    cfg: LossConfig,
    rng: Rng,
    stats: Optional[TransportStats] = None,
    subsets: Optional[np.ndarray] = None,
    prior_points: Optional[Any] = None,
) -> Tensor:
    """
    Sinkhorn Divergence between normalized sample subsets and fresh prior draws

    For every input n and repetition l, K predicted samples are drawn without
    replacement, normalized per dimension, and compared with K new prior points.
    Subsets with a degenerate dimension contribute zero and are counted.

    Args:
        samples: N x M x d predicted samples
        cfg: Loss configuration (K, L, prior, epsilon, Sinkhorn controls)
        rng: Stream for subsets and prior draws
        stats: Optional counters to update
        subsets: Explicit N x L x K index array
        prior_points: Explicit N x L x K x d prior draws

    Returns:
        Scalar Tensor normalized by 1/(N*L)
    """
    samples = as_tensor(samples)
    if samples.ndim != 3:
        raise ShapeError(f"Expected N x M x d samples, got {list(samples.shape)}")
    n_inputs, m, dims = samples.shape
    if not 1 <= cfg.K <= m:
        raise ConfigError(f"Minibatch size K={cfg.K} must satisfy 1 <= K <= M={m}")

    if subsets is None:
        subsets = rng.subsets(n_inputs, m, cfg.K, cfg.L)
    picked = gather_subsets(samples, np.asarray(subsets, dtype=np.int64))
    normalized, degenerate = normalize_samples(picked, cfg.prior)
    keep = ~np.any(degenerate, axis=-1)

    if prior_points is None:
        prior = sample_prior(cfg.prior, cfg.K, dims, rng, batch_shape=picked.shape[:2])
    else:
        prior = PointCloud.uniform(prior_points)
        if prior.points.shape != picked.shape:
            raise ShapeError(f"Prior draws {list(prior.points.shape)} do not match subsets {list(picked.shape)}")

    divergence, converged = divergence_with_status(
        PointCloud.uniform(normalized),
        prior,
        epsilon=cfg.epsilon,
        max_iters=cfg.sinkhorn_iters,
        tol=cfg.sinkhorn_tol,
        gradient=cfg.sinkhorn_gradient,
        warn=False,
    )

    skipped = int(keep.size - np.count_nonzero(keep))
    if stats is not None:
        stats.evaluations += 1
        stats.divergences += int(keep.size)
        stats.degenerate_skipped += skipped
        stats.nonconverged += 0 if converged else 1
    if skipped:
        logger.debug(f"Skipped {skipped} degenerate sample subsets in the Sinkhorn regularizer")
        divergence = divergence * Tensor(keep.astype(np.float64))
    return divergence.sum() / float(keep.size)
