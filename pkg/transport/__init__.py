"""
SampleNet Transport Package
Normalization, priors, Sinkhorn iterations and the debiased Sinkhorn Divergence
"""

from .normalization import STD_FLOOR, normalize_samples
from .sinkhorn import (
    PointCloud,
    SinkhornResult,
    divergence_with_status,
    entropic_ot,
    sample_prior,
    sinkhorn_divergence,
    solve_sinkhorn,
)
from .minibatch import TransportStats, minibatch_sinkhorn

__all__ = [
    'normalize_samples',
    'STD_FLOOR',
    'PointCloud',
    'SinkhornResult',
    'sample_prior',
    'solve_sinkhorn',
    'entropic_ot',
    'sinkhorn_divergence',
    'divergence_with_status',
    'minibatch_sinkhorn',
    'TransportStats',
]
