"""
SampleNet Scoring Package
Proper scoring rules and point metrics for predictive distributions
"""

from .config import BaselineConfig, LossConfig, PRIORS
from .rules import (
    beta_nll,
    energy_score,
    gather_subsets,
    gaussian_nll,
    gaussian_samples,
    minibatch_energy_score,
    rmse,
)

__all__ = [
    'LossConfig',
    'BaselineConfig',
    'PRIORS',
    'energy_score',
    'minibatch_energy_score',
    'gather_subsets',
    'gaussian_nll',
    'beta_nll',
    'rmse',
    'gaussian_samples',
]
