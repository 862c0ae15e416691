"""
Loss Configuration - Hyperparameters of the sample-based and baseline losses
"""

import logging
from dataclasses import asdict, dataclass, fields
from typing import Any, Dict, Optional

from diffmath.errors import ConfigError

logger = logging.getLogger(__name__)

PRIORS = ("uniform", "gaussian")
SINKHORN_GRADIENTS = ("unroll", "envelope")


def _from_mapping(cls, values: Optional[Dict[str, Any]]):
    values = dict(values or {})
    known = {field.name for field in fields(cls)}
    unknown = sorted(set(values) - known)
    if unknown:
        raise ConfigError(f"Unknown {cls.__name__} keys: {unknown}")
    return cls(**values)


@dataclass
class LossConfig:
    """Energy Score + Sinkhorn regularizer settings for SampleNet training"""

    M: int = 100
    K: Optional[int] = None
    L: int = 1
    eta: float = 0.0
    prior: str = "gaussian"
    epsilon: float = 0.0025
    sinkhorn_iters: int = 200
    sinkhorn_tol: float = 1e-6
    sinkhorn_gradient: str = "unroll"

    def __post_init__(self):
        if self.K is None:
            self.K = self.M
        self.M, self.K, self.L = int(self.M), int(self.K), int(self.L)
        self.eta, self.epsilon = float(self.eta), float(self.epsilon)
        self.sinkhorn_iters, self.sinkhorn_tol = int(self.sinkhorn_iters), float(self.sinkhorn_tol)
        if self.M < 1:
            raise ConfigError(f"M must be >= 1, got {self.M}")
        if not 1 <= self.K <= self.M:
            raise ConfigError(f"K must satisfy 1 <= K <= M, got K={self.K}, M={self.M}")
        if self.L < 1:
            raise ConfigError(f"L must be >= 1, got {self.L}")
        if self.eta < 0:
            raise ConfigError(f"eta must be >= 0, got {self.eta}")
        if self.epsilon <= 0:
            raise ConfigError(f"epsilon must be > 0, got {self.epsilon}")
        if self.prior not in PRIORS:
            raise ConfigError(f"prior must be one of {PRIORS}, got '{self.prior}'")
        if self.sinkhorn_iters < 1 or self.sinkhorn_tol < 0:
            raise ConfigError("sinkhorn_iters must be >= 1 and sinkhorn_tol >= 0")
        if self.sinkhorn_gradient not in SINKHORN_GRADIENTS:
            raise ConfigError(f"sinkhorn_gradient must be one of {SINKHORN_GRADIENTS}")

    @classmethod
    def from_dict(cls, values: Optional[Dict[str, Any]]) -> "LossConfig":
        return _from_mapping(cls, values)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class BaselineConfig:
    """beta-NLL variance network settings"""

    beta: float = 0.0

    def __post_init__(self):
        self.beta = float(self.beta)
        if not 0.0 <= self.beta <= 1.0:
            raise ConfigError(f"beta must lie in [0, 1], got {self.beta}")

    @classmethod
    def from_dict(cls, values: Optional[Dict[str, Any]]) -> "BaselineConfig":
        return _from_mapping(cls, values)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)
