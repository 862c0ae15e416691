"""
Datasets - Immutable regression tables and the split protocol settings
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np

from diffmath.errors import ConfigError, DataError

logger = logging.getLogger(__name__)


def _frozen(values: Any, name: str) -> np.ndarray:
    array = np.array(values, dtype=np.float64)
    if array.ndim == 1:
        array = array[:, None]
    if array.ndim != 2:
        raise DataError(f"{name} must be a 2-D table, got shape {list(array.shape)}")
    if not np.all(np.isfinite(array)):
        raise DataError(f"{name} holds non-finite values")
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class WhiteningStats:
    """Per-input-dimension training mean and std; degenerate columns map to zero"""

    mean: np.ndarray
    std: np.ndarray
    degenerate: np.ndarray

    def apply(self, X: np.ndarray) -> np.ndarray:
        scaled = (np.asarray(X, dtype=np.float64) - self.mean) / self.std
        scaled[:, self.degenerate] = 0.0
        return scaled

    def to_dict(self) -> Dict[str, Any]:
        return {"mean": self.mean.tolist(), "std": self.std.tolist(), "degenerate": self.degenerate.tolist()}


@dataclass(frozen=True)
class Dataset:
    """
    N x c inputs with N x d targets

    `indices` holds each row's position in the table the dataset was cut from,
    `groups` an optional per-row component label (toy mixtures) and
    `outlier_indices` the rows appended as synthetic outliers.
    """

    X: np.ndarray
    Y: np.ndarray
    x_columns: Tuple[str, ...] = ()
    y_columns: Tuple[str, ...] = ()
    whitening: Optional[WhiteningStats] = None
    outlier_indices: Tuple[int, ...] = ()
    groups: Optional[np.ndarray] = None
    indices: Optional[np.ndarray] = None
    source: str = "memory"

    def __post_init__(self):
        X, Y = _frozen(self.X, "X"), _frozen(self.Y, "Y")
        if X.shape[0] != Y.shape[0]:
            raise DataError(f"X has {X.shape[0]} rows but Y has {Y.shape[0]}")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Y", Y)
        x_columns = tuple(self.x_columns) or tuple(f"x{i}" for i in range(X.shape[1]))
        y_columns = tuple(self.y_columns) or tuple(f"y{i}" for i in range(Y.shape[1]))
        if len(x_columns) != X.shape[1] or len(y_columns) != Y.shape[1]:
            raise DataError(f"Column names {x_columns} / {y_columns} do not match shapes {X.shape} / {Y.shape}")
        object.__setattr__(self, "x_columns", x_columns)
        object.__setattr__(self, "y_columns", y_columns)
        indices = np.arange(X.shape[0]) if self.indices is None else np.asarray(self.indices, dtype=np.int64)
        if indices.shape != (X.shape[0],):
            raise DataError(f"indices must hold one entry per row, got shape {list(indices.shape)}")
        object.__setattr__(self, "indices", indices)
        if self.groups is not None:
            groups = np.asarray(self.groups, dtype=np.int64)
            if groups.shape != (X.shape[0],):
                raise DataError(f"groups must hold one entry per row, got shape {list(groups.shape)}")
            object.__setattr__(self, "groups", groups)
        object.__setattr__(self, "outlier_indices", tuple(int(i) for i in self.outlier_indices))

    @property
    def n(self) -> int:
        return int(self.X.shape[0])

    @property
    def c(self) -> int:
        return int(self.X.shape[1])

    @property
    def d(self) -> int:
        return int(self.Y.shape[1])

    @property
    def outlier_mask(self) -> np.ndarray:
        mask = np.zeros(self.n, dtype=bool)
        mask[list(self.outlier_indices)] = True
        return mask

    def subset(self, rows: Sequence[int]) -> "Dataset":
        """Rows of this dataset, keeping lineage, groups and outlier flags"""
        rows = np.asarray(rows, dtype=np.int64)
        outliers = self.outlier_mask[rows]
        return Dataset(
            X=self.X[rows],
            Y=self.Y[rows],
            x_columns=self.x_columns,
            y_columns=self.y_columns,
            whitening=self.whitening,
            outlier_indices=tuple(np.flatnonzero(outliers)),
            groups=None if self.groups is None else self.groups[rows],
            indices=self.indices[rows],
            source=self.source,
        )

    def with_inputs(self, X: np.ndarray, whitening: Optional[WhiteningStats]) -> "Dataset":
        return Dataset(
            X=X,
            Y=self.Y,
            x_columns=self.x_columns,
            y_columns=self.y_columns,
            whitening=whitening,
            outlier_indices=self.outlier_indices,
            groups=self.groups,
            indices=self.indices,
            source=self.source,
        )


@dataclass
class SplitSpec:
    """Repeated random train/test protocol"""

    test_fraction: float = 0.2
    n_splits: int = 1
    base_seed: int = 0
    validation_fraction: float = 0.2

    def __post_init__(self):
        self.test_fraction, self.validation_fraction = float(self.test_fraction), float(self.validation_fraction)
        self.n_splits, self.base_seed = int(self.n_splits), int(self.base_seed)
        if not 0.0 < self.test_fraction < 1.0:
            raise ConfigError(f"test_fraction must lie in (0, 1), got {self.test_fraction}")
        if not 0.0 <= self.validation_fraction < 1.0:
            raise ConfigError(f"validation_fraction must lie in [0, 1), got {self.validation_fraction}")
        if self.n_splits < 1:
            raise ConfigError(f"n_splits must be >= 1, got {self.n_splits}")

    @classmethod
    def from_dict(cls, values: Optional[Dict[str, Any]]) -> "SplitSpec":
        values = dict(values or {})
        unknown = sorted(set(values) - set(cls.__dataclass_fields__))
        if unknown:
            raise ConfigError(f"Unknown split keys: {unknown}")
        return cls(**values)
