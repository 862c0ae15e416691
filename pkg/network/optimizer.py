"""
Adam Optimizer - Bias-corrected first and second moment updates
"""

import logging
from dataclasses import dataclass, field
from typing import List, Sequence

import numpy as np

from diffmath.errors import ConfigError, NumericError, ShapeError
from diffmath.tensor import Tensor

logger = logging.getLogger(__name__)


@dataclass
class AdamState:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: List[np.ndarray] = field(default_factory=list)
    v: List[np.ndarray] = field(default_factory=list)

    def __post_init__(self):
        if not self.lr > 0:
            raise ConfigError(f"learning_rate must be positive, got {self.lr}")
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise ConfigError(f"Adam betas must lie in [0, 1), got {self.beta1}, {self.beta2}")


def adam_step(params: Sequence[Tensor], grads: Sequence[np.ndarray], state: AdamState) -> AdamState:
    """
    Apply one Adam update in place

    Parameters are left untouched when any gradient is non-finite.
    """
    if len(params) != len(grads):
        raise ShapeError(f"Got {len(grads)} gradients for {len(params)} parameters")
    for param, grad in zip(params, grads):
        if grad.shape != param.shape:
            raise ShapeError(f"Gradient shape {list(grad.shape)} does not match parameter {list(param.shape)}")
        if not np.all(np.isfinite(grad)):
            raise NumericError("Non-finite gradient, refusing to update parameters")

    if not state.m:
        state.m = [np.zeros_like(param.values) for param in params]
        state.v = [np.zeros_like(param.values) for param in params]

    state.t += 1
    correction1 = 1.0 - state.beta1 ** state.t
    correction2 = 1.0 - state.beta2 ** state.t
    for index, (param, grad) in enumerate(zip(params, grads)):
        state.m[index] = state.beta1 * state.m[index] + (1.0 - state.beta1) * grad
        state.v[index] = state.beta2 * state.v[index] + (1.0 - state.beta2) * grad * grad
        m_hat = state.m[index] / correction1
        v_hat = state.v[index] / correction2
        param.values = param.values - state.lr * m_hat / (np.sqrt(v_hat) + state.eps)
    return state
