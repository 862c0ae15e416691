"""
Table I/O - CSV ingestion and export plus dataset manifests
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Sequence, Union

import numpy as np
import pandas as pd

from diffmath.errors import ArtifactError, DataError

from .dataset import Dataset

logger = logging.getLogger(__name__)

MANIFEST_KEYS = ("source", "target_columns", "n", "c", "d", "seed")


def load_csv(path: Union[str, Path], target_columns: Sequence[str]) -> Dataset:
    """
    Read a numeric CSV table with a header row

    Inputs are every non-target column in file order; targets follow the order
    of `target_columns`. Cells are parsed with correctly rounded float
    conversion so written datasets reload bit-exactly.
    """
    path = Path(path)
    target_columns = list(target_columns)
    if not target_columns:
        raise DataError("At least one target column is required")
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=True, encoding="utf-8")
    except FileNotFoundError as e:
        raise DataError(f"CSV file not found: {path}") from e
    except pd.errors.EmptyDataError as e:
        raise DataError(f"{path} has no header row") from e
    except pd.errors.ParserError as e:
        raise DataError(f"Ragged row in {path}: {e}") from e
    except UnicodeDecodeError as e:
        raise DataError(f"{path} is not UTF-8 text: byte {e.object[e.start:e.end]!r} at offset {e.start}") from e

    header = list(frame.columns)
    if len(set(header)) != len(header) or any(name.startswith("Unnamed:") for name in header):
        raise DataError(f"{path} has blank or duplicate column names: {header}")
    missing = [name for name in target_columns if name not in header]
    if missing:
        raise DataError(f"{path} is missing target column(s) {missing}; header is {header}")
    input_columns = [name for name in header if name not in target_columns]
    if not input_columns:
        raise DataError(f"{path} has no input columns besides the targets")
    if frame.empty:
        raise DataError(f"{path} holds a header but no data rows")

    for name in header:
        column = frame[name]
        short = column.map(lambda cell: not isinstance(cell, str))
        if short.any():
            row = int(np.flatnonzero(short.to_numpy())[0])
            raise DataError(f"Ragged row at line {row + 2} of {path}: missing value for column '{name}'")
        parsed = pd.to_numeric(column, errors="coerce")
        bad = ~np.isfinite(parsed.to_numpy(dtype=np.float64))
        if bad.any():
            row = int(np.flatnonzero(bad)[0])
            raise DataError(f"Non-numeric cell {column.iloc[row]!r} at line {row + 2}, column '{name}' of {path}")

    X = frame[input_columns].astype(np.float64).to_numpy()
    Y = frame[target_columns].astype(np.float64).to_numpy()
    logger.info(f"Loaded {len(frame)} rows from {path}: {len(input_columns)} inputs, {len(target_columns)} targets")
    return Dataset(X=X, Y=Y, x_columns=tuple(input_columns), y_columns=tuple(target_columns), source=str(path))


def write_csv(dataset: Dataset, path: Union[str, Path]) -> Path:
    """Write inputs then targets with shortest round-trip float formatting"""
    path = Path(path)
    frame = pd.DataFrame(
        np.hstack([dataset.X, dataset.Y]),
        columns=list(dataset.x_columns) + list(dataset.y_columns),
    )
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(path, index=False, lineterminator="\n")
    except OSError as e:
        raise ArtifactError(f"Cannot write {path}: {e}") from e
    logger.info(f"Wrote {dataset.n} rows to {path}")
    return path


def build_manifest(dataset: Dataset, seed: Optional[int] = None) -> Dict[str, Any]:
    return {
        "source": dataset.source,
        "target_columns": list(dataset.y_columns),
        "n": dataset.n,
        "c": dataset.c,
        "d": dataset.d,
        "seed": seed,
        "outlier_indices": list(dataset.outlier_indices),
    }


def write_manifest(dataset: Dataset, path: Union[str, Path], seed: Optional[int] = None) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(build_manifest(dataset, seed), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    except OSError as e:
        raise ArtifactError(f"Cannot write manifest {path}: {e}") from e
    return path


def read_manifest(path: Union[str, Path]) -> Dict[str, Any]:
    path = Path(path)
    try:
        manifest = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, ValueError) as e:
        raise ArtifactError(f"Cannot read manifest {path}: {e}") from e
    missing = [key for key in MANIFEST_KEYS if key not in manifest]
    if missing:
        raise ArtifactError(f"Manifest {path} lacks {missing}")
    return manifest


def load_dataset(csv_path: Union[str, Path], manifest_path: Optional[Union[str, Path]] = None,
                 target_columns: Optional[Sequence[str]] = None) -> Dataset:
    """Load a CSV using the target columns named by its manifest (or given explicitly)"""
    csv_path = Path(csv_path)
    manifest: Dict[str, Any] = {}
    if manifest_path is None:
        candidate = csv_path.with_suffix(".manifest.json")
        manifest_path = candidate if candidate.exists() else None
    if manifest_path is not None:
        manifest = read_manifest(manifest_path)
    targets = list(target_columns or manifest.get("target_columns") or [])
    if not targets:
        raise DataError(f"No target columns given for {csv_path} and no manifest found")
    dataset = load_csv(csv_path, targets)
    if manifest.get("outlier_indices"):
        dataset = Dataset(
            X=dataset.X, Y=dataset.Y, x_columns=dataset.x_columns, y_columns=dataset.y_columns,
            outlier_indices=tuple(manifest["outlier_indices"]), source=manifest.get("source", dataset.source),
        )
    return dataset
