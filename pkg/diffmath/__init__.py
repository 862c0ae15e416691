"""
SampleNet Differentiable Math Package
Dense float64 tensors, seeded random streams and reverse-mode differentiation
"""

from .errors import (
    ArtifactError,
    ConfigError,
    ContractError,
    DataError,
    DomainError,
    GraphError,
    NumericError,
    ProtocolError,
    SampleNetError,
    ShapeError,
    TrainingAborted,
)
from .tensor import (
    Tape,
    Tensor,
    as_tensor,
    backward,
    elu,
    exp,
    log,
    logsumexp,
    matmul,
    norm,
    pairwise_distance,
    softplus,
    sqrt,
    stop_gradient,
    tanh,
)
from .rng import Rng, derive_seed, rng_draw

__all__ = [
    'Tensor',
    'Tape',
    'backward',
    'as_tensor',
    'pairwise_distance',
    'norm',
    'logsumexp',
    'matmul',
    'exp',
    'log',
    'sqrt',
    'tanh',
    'elu',
    'softplus',
    'stop_gradient',
    'Rng',
    'rng_draw',
    'derive_seed',
    'SampleNetError',
    'ShapeError',
    'GraphError',
    'ContractError',
    'DomainError',
    'ConfigError',
    'DataError',
    'NumericError',
    'ProtocolError',
    'ArtifactError',
    'TrainingAborted',
]
