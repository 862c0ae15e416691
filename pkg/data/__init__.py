"""
Data - Datasets, toy generators, CSV tables, splits and whitening
"""

from .dataset import Dataset, SplitSpec, WhiteningStats
from .splits import holdout_size, split, train_validation_split, whiten_inputs
from .tables import build_manifest, load_csv, load_dataset, read_manifest, write_csv, write_manifest
from .toy import (
    gen_multimodal_toy,
    gen_unimodal_toy,
    multimodal_curves,
    outlier_curve,
    unimodal_band,
    unimodal_curve,
)

__all__ = [
    "Dataset",
    "SplitSpec",
    "WhiteningStats",
    "build_manifest",
    "gen_multimodal_toy",
    "gen_unimodal_toy",
    "holdout_size",
    "load_csv",
    "load_dataset",
    "multimodal_curves",
    "outlier_curve",
    "read_manifest",
    "split",
    "train_validation_split",
    "unimodal_band",
    "unimodal_curve",
    "whiten_inputs",
    "write_csv",
    "write_manifest",
]
