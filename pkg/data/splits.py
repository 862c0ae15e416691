"""
Splitting and Whitening - Seeded train/test partitions and train-only input whitening
"""

import logging
import math
from typing import Optional, Tuple

import numpy as np

from diffmath.errors import ContractError, DataError
from diffmath.rng import Rng, derive_seed

from .dataset import Dataset, SplitSpec, WhiteningStats

logger = logging.getLogger(__name__)

STD_FLOOR = 1e-8
VALIDATION_STREAM = 1


def holdout_size(n: int, fraction: float) -> int:
    """round(n * fraction), halves rounded up, clamped to [1, n - 1]"""
    return min(max(int(math.floor(n * fraction + 0.5)), 1), n - 1)


def _partition(dataset: Dataset, fraction: float, seed: int) -> Tuple[Dataset, Dataset]:
    if dataset.n < 2:
        raise DataError(f"Cannot split a dataset of {dataset.n} row(s)")
    order = Rng(seed).permutation(dataset.n)
    n_holdout = holdout_size(dataset.n, fraction)
    held = np.sort(order[:n_holdout])
    kept = np.sort(order[n_holdout:])
    return dataset.subset(kept), dataset.subset(held)


def split(dataset: Dataset, spec: SplitSpec, split_index: int) -> Tuple[Dataset, Dataset]:
    """
    Seeded train/test partition number `split_index`

    The permutation is drawn from derive_seed(base_seed, split_index), so the
    same (seed, index) always yields the same partition.

    Returns:
        (train, test)
    """
    if not 0 <= split_index < spec.n_splits:
        raise ContractError(f"split_index {split_index} outside [0, {spec.n_splits})")
    train, test = _partition(dataset, spec.test_fraction, derive_seed(spec.base_seed, split_index))
    logger.debug(f"Split {split_index}: {train.n} train rows, {test.n} test rows")
    return train, test


def train_validation_split(train: Dataset, spec: SplitSpec, split_index: int) -> Tuple[Dataset, Optional[Dataset]]:
    """Hold out validation_fraction of a training partition for early stopping"""
    if spec.validation_fraction == 0.0 or train.n < 2:
        return train, None
    fit, validation = _partition(train, spec.validation_fraction,
                                 derive_seed(spec.base_seed, split_index, VALIDATION_STREAM))
    return fit, validation


def whiten_inputs(train: Dataset, test: Optional[Dataset] = None) -> Tuple[Dataset, Optional[Dataset], WhiteningStats]:
    """
    Standardize inputs with statistics from the training rows only

    Columns whose population std is below STD_FLOOR are flagged degenerate and
    mapped to zero. Targets are left untouched.
    """
    if train.n == 0:
        raise DataError("Cannot whiten with an empty training set")
    mean = train.X.mean(axis=0)
    std = train.X.std(axis=0)
    degenerate = std < STD_FLOOR
    if degenerate.any():
        logger.warning(f"Input column(s) {[train.x_columns[i] for i in np.flatnonzero(degenerate)]} are constant on train")
    stats = WhiteningStats(mean=mean, std=np.maximum(std, STD_FLOOR), degenerate=degenerate)
    white_train = train.with_inputs(stats.apply(train.X), stats)
    white_test = None if test is None else test.with_inputs(stats.apply(test.X), stats)
    return white_train, white_test, stats
