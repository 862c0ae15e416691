"""
Toy Datasets - Heteroscedastic unimodal and two-branch multimodal generators
"""

import logging
from typing import Tuple

import numpy as np

from diffmath.errors import ContractError
from diffmath.rng import Rng

from .dataset import Dataset

logger = logging.getLogger(__name__)

X_RANGE = (0.0, 10.0)
NOISE_SCALE = 0.3
DEFAULT_SIZE = 500
DEFAULT_OUTLIERS = 20
BAND_Z = 1.96


def _check_size(n: int, minimum: int, name: str):
    if n < minimum:
        raise ContractError(f"{name} needs n >= {minimum}, got {n}")


def unimodal_curve(x: np.ndarray) -> np.ndarray:
    """Noiseless mean of the unimodal toy: x sin(x)"""
    x = np.asarray(x, dtype=np.float64)
    return x * np.sin(x)


def unimodal_band(x: np.ndarray, noise_scale: float = NOISE_SCALE, z: float = BAND_Z) -> Tuple[np.ndarray, np.ndarray]:
    """True central band: y +- z * sigma * sqrt(1 + x^2)"""
    x = np.asarray(x, dtype=np.float64)
    half_width = z * noise_scale * np.sqrt(1.0 + x * x)
    center = unimodal_curve(x)
    return center - half_width, center + half_width


def outlier_curve(x: np.ndarray) -> np.ndarray:
    return np.asarray(x, dtype=np.float64) + 7.0


def multimodal_curves(x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Noiseless branches: cos(x) - 5 and x + 5"""
    x = np.asarray(x, dtype=np.float64)
    return np.cos(x) - 5.0, x + 5.0


def gen_unimodal_toy(
    n: int = DEFAULT_SIZE,
    rng: Rng = None,
    with_outliers: int = 0,
    noise_scale: float = NOISE_SCALE,
) -> Dataset:
    """
    y = x sin(x) + e1 x + e2 with x ~ U[0, 10] and e1, e2 ~ N(0, noise_scale^2)

    `with_outliers` rows on y = x + 7 (x ~ U[0, 10]) are appended after the
    regular rows and listed in outlier_indices.
    """
    _check_size(n, 1, "gen_unimodal_toy")
    if with_outliers < 0:
        raise ContractError(f"Outlier count must be >= 0, got {with_outliers}")
    rng = rng or Rng(0)
    x = rng.uniform(*X_RANGE, n)
    noise_slope = rng.normal(noise_scale, n)
    noise_offset = rng.normal(noise_scale, n)
    y = unimodal_curve(x) + noise_slope * x + noise_offset

    outlier_indices: Tuple[int, ...] = ()
    if with_outliers:
        x_out = rng.uniform(*X_RANGE, with_outliers)
        x = np.concatenate([x, x_out])
        y = np.concatenate([y, outlier_curve(x_out)])
        outlier_indices = tuple(range(n, n + with_outliers))

    logger.info(f"Generated unimodal toy with {n} rows and {with_outliers} outliers")
    return Dataset(X=x[:, None], Y=y[:, None], x_columns=("x",), y_columns=("y",),
                   outlier_indices=outlier_indices, source="unimodal_toy")


def gen_multimodal_toy(n: int = DEFAULT_SIZE, rng: Rng = None, noise_scale: float = NOISE_SCALE) -> Dataset:
    """
    Two-branch mixture with equal branch probability

    Branch 0: y = cos(x) + e1 x + e2 - 5; branch 1: y = (e1 + 1) x + e2 + 5.
    The branch of each row is kept in `groups`.
    """
    _check_size(n, 1, "gen_multimodal_toy")
    rng = rng or Rng(0)
    x = rng.uniform(*X_RANGE, n)
    noise_slope = rng.normal(noise_scale, n)
    noise_offset = rng.normal(noise_scale, n)
    branch = rng.bernoulli(0.5, n)
    lower, upper = multimodal_curves(x)
    y = np.where(branch, upper, lower) + noise_slope * x + noise_offset

    logger.info(f"Generated multimodal toy with {n} rows ({int(branch.sum())} on the upper branch)")
    return Dataset(X=x[:, None], Y=y[:, None], x_columns=("x",), y_columns=("y",),
                   groups=branch.astype(np.int64), source="multimodal_toy")
