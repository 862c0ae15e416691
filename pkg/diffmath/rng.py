"""
Seedable Random Streams - Counter-based generators with deterministic splitting
"""

import logging
from typing import Sequence, Tuple, Union

import numpy as np

from .errors import ContractError, ShapeError
from .tensor import Tensor

logger = logging.getLogger(__name__)

DISTRIBUTIONS = ("standard_normal", "uniform01")

Shape = Union[int, Sequence[int]]


def _check_shape(shape: Shape) -> Tuple[int, ...]:
    dims = (shape,) if isinstance(shape, (int, np.integer)) else tuple(shape)
    if any(int(dim) <= 0 for dim in dims):
        raise ShapeError(f"Shape dims must be positive, got {list(dims)}")
    return tuple(int(dim) for dim in dims)


def derive_seed(base_seed: int, *keys: int) -> int:
    """
    Derive a child seed from a base seed and integer keys

    Args:
        base_seed: Run-level seed
        keys: Stream identifiers such as split or grid index

    Returns:
        A non-negative 63-bit seed, identical across platforms
    """
    sequence = np.random.SeedSequence([int(base_seed) & 0xFFFFFFFFFFFFFFFF, *[int(k) for k in keys]])
    return int(sequence.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


class Rng:
    """Philox-backed random stream owned by a single writer"""

    def __init__(self, seed: int):
        self.seed = int(seed)
        self._generator = np.random.Generator(np.random.Philox(np.random.SeedSequence(self.seed & 0xFFFFFFFFFFFFFFFF)))

    def spawn(self, *keys: int) -> "Rng":
        """Independent child stream; never shares draws with the parent"""
        return Rng(derive_seed(self.seed, *keys))

    def draw(self, dist: str, shape: Shape) -> Tensor:
        """Draw i.i.d. values as a constant Tensor"""
        dims = _check_shape(shape)
        if dist == "standard_normal":
            values = self._generator.standard_normal(dims)
        elif dist == "uniform01":
            values = self._generator.random(dims)
        else:
            raise ContractError(f"Unknown distribution '{dist}', expected one of {DISTRIBUTIONS}")
        return Tensor(values)

    def uniform(self, low: float, high: float, size: Shape) -> np.ndarray:
        return self._generator.uniform(low, high, _check_shape(size))

    def normal(self, scale: float, size: Shape) -> np.ndarray:
        return self._generator.normal(0.0, scale, _check_shape(size))

    def bernoulli(self, p: float, size: Shape) -> np.ndarray:
        return self._generator.random(_check_shape(size)) < p

    def permutation(self, n: int) -> np.ndarray:
        return self._generator.permutation(n)

    def choice(self, n: int, k: int) -> np.ndarray:
        """k distinct indices out of n"""
        if not 1 <= k <= n:
            raise ContractError(f"Cannot choose {k} distinct items out of {n}")
        return self._generator.choice(n, size=k, replace=False, shuffle=True)

    def subsets(self, n_inputs: int, m: int, k: int, repetitions: int) -> np.ndarray:
        """
        Index subsets drawn without replacement, fresh per (input, repetition)

        Returns:
            Integer array of shape (n_inputs, repetitions, k)
        """
        if not 1 <= k <= m:
            raise ContractError(f"Subset size K={k} must satisfy 1 <= K <= M={m}")
        if k == m:
            return np.broadcast_to(np.arange(m), (n_inputs, repetitions, m)).copy()
        # argsort of uniform keys is a uniformly random permutation per row
        keys = self._generator.random((n_inputs, repetitions, m))
        return np.argsort(keys, axis=-1, kind="stable")[..., :k]


def rng_draw(rng: Rng, dist: str, shape: Shape) -> Tensor:
    """Module-level form of Rng.draw"""
    return rng.draw(dist, shape)
