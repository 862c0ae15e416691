"""
Plot Emission - Scatter, central-interval and HPD views of a trained run as SVG + CSV
"""

import logging
from pathlib import Path
from typing import Any, Dict, Optional, Union

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402

from data.dataset import Dataset  # noqa: E402
from data.tables import load_csv  # noqa: E402
from data.toy import multimodal_curves, outlier_curve, unimodal_band, unimodal_curve  # noqa: E402
from diffmath.errors import ArtifactError, ContractError  # noqa: E402
from diffmath.rng import Rng  # noqa: E402
from network.model import SampleNetModel, forward_gaussian, forward_samples, load_checkpoint  # noqa: E402
from scoring.rules import gaussian_samples  # noqa: E402
from summaries.intervals import hpd_intervals, mode_estimate  # noqa: E402
from summaries.statistics import central_interval, sample_mean  # noqa: E402

logger = logging.getLogger(__name__)

PLOT_KINDS = ("scatter", "interval", "hpd")
SVG_HASH_SALT = "samplenet"
DEFAULT_EVAL_M = 100

plt.rcParams["svg.hashsalt"] = SVG_HASH_SALT


def _whiten_grid(x: np.ndarray, whitening: Optional[Dict[str, Any]]) -> np.ndarray:
    if not whitening:
        return x[:, None]
    mean, std = np.asarray(whitening["mean"]), np.asarray(whitening["std"])
    scaled = (x[:, None] - mean) / std
    scaled[:, np.asarray(whitening["degenerate"], dtype=bool)] = 0.0
    return scaled


def predict_grid_samples(model: SampleNetModel, X: np.ndarray, eval_M: int = DEFAULT_EVAL_M, seed: int = 0) -> np.ndarray:
    """Predicted samples of the first output dimension, grid_points x M"""
    if model.config.head == "samples":
        samples = forward_samples(model, X).values
    else:
        mean, var = forward_gaussian(model, X)
        samples = gaussian_samples(mean, var, eval_M, Rng(seed)).values
    return samples[:, :, 0]


def _overlay_truth(ax, dataset_name: Optional[str], x: np.ndarray, band: bool):
    if dataset_name == "unimodal":
        ax.plot(x, unimodal_curve(x), color="black", linewidth=1.0, label="x sin(x)")
        if band:
            lo, hi = unimodal_band(x)
            ax.plot(x, lo, color="black", linestyle="--", linewidth=0.8)
            ax.plot(x, hi, color="black", linestyle="--", linewidth=0.8, label="true 95% band")
    elif dataset_name == "multimodal":
        lower, upper = multimodal_curves(x)
        ax.plot(x, lower, color="black", linewidth=1.0, label="branches")
        ax.plot(x, upper, color="black", linewidth=1.0)


def _overlay_points(ax, train: Dataset, dataset_name: Optional[str]):
    outliers = train.outlier_mask
    ax.plot(train.X[~outliers, 0], train.Y[~outliers, 0], "ko", markersize=2, alpha=0.3, label="train")
    if outliers.any():
        ax.plot(train.X[outliers, 0], train.Y[outliers, 0], "ro", markersize=3, label="outliers")
        if dataset_name == "unimodal":
            x = np.sort(train.X[outliers, 0])
            ax.plot(x, outlier_curve(x), color="red", linewidth=0.6, linestyle=":")


def _scatter_frame(ax, x: np.ndarray, samples: np.ndarray) -> pd.DataFrame:
    M = samples.shape[1]
    ax.scatter(np.repeat(x, M), samples.reshape(-1), s=1, color="tab:blue", alpha=0.2, label="samples")
    return pd.DataFrame({"x": np.repeat(x, M), "sample_index": np.tile(np.arange(M), x.size), "y": samples.reshape(-1)})


def _interval_frame(ax, x: np.ndarray, samples: np.ndarray, level: float) -> pd.DataFrame:
    mean = sample_mean(samples[:, :, None])[:, 0]
    bounds = np.array([central_interval(row, level) for row in samples])
    ax.fill_between(x, bounds[:, 0], bounds[:, 1], color="tab:blue", alpha=0.3, label=f"{level:.0%} interval")
    ax.plot(x, mean, color="tab:blue", linewidth=1.5, label="mean")
    return pd.DataFrame({"x": x, "mean": mean, "lo": bounds[:, 0], "hi": bounds[:, 1]})


def _hpd_frame(ax, x: np.ndarray, samples: np.ndarray, level: float, bins: Optional[int]) -> pd.DataFrame:
    rows = []
    modes = []
    for x_value, row in zip(x, samples):
        mode = mode_estimate(row, bins)
        modes.append(mode)
        hpd = hpd_intervals(row, level, bins)
        for interval_index, (lo, hi) in enumerate(hpd.intervals):
            rows.append(
                {"x": x_value, "mode": mode, "interval_index": interval_index, "lo": lo, "hi": hi,
                 "achieved_mass": hpd.achieved_mass}
            )
    frame = pd.DataFrame(rows, columns=["x", "mode", "interval_index", "lo", "hi", "achieved_mass"])
    ax.vlines(frame["x"], frame["lo"], frame["hi"], color="tab:blue", alpha=0.4, linewidth=1.5,
              label=f"{level:.0%} HPD")
    ax.plot(x, modes, ".", color="navy", markersize=2, label="mode")
    return frame


def cmd_plot(run_dir: Union[str, Path], kind: str = "interval", options: Optional[Dict[str, Any]] = None) -> Dict[str, Path]:
    """
    Render a trained run over a grid of test inputs

    Writes plot_<kind>.svg and plot_<kind>.csv into the run directory. The CSV
    holds every plotted number: scatter (x, sample_index, y), interval
    (x, mean, lo, hi), hpd (x, mode, interval_index, lo, hi, achieved_mass).
    """
    if kind not in PLOT_KINDS:
        raise ContractError(f"Plot kind must be one of {PLOT_KINDS}, got '{kind}'")
    options = options or {}
    run_dir = Path(run_dir)
    checkpoint, train_csv = run_dir / "checkpoint.json", run_dir / "train.csv"
    if not checkpoint.exists() or not train_csv.exists():
        raise ArtifactError(f"{run_dir} lacks checkpoint.json or train.csv; run 'train' first")

    model, metadata = load_checkpoint(checkpoint)
    train = load_csv(train_csv, metadata.get("y_columns") or ["y"])
    train = Dataset(X=train.X, Y=train.Y, x_columns=train.x_columns, y_columns=train.y_columns,
                    outlier_indices=tuple(metadata.get("outlier_indices") or ()), source=train.source)
    if train.c != 1:
        raise ContractError(f"Plots need a single input column, the run has {train.c}")

    x = np.linspace(float(train.X.min()), float(train.X.max()), int(options.get("grid_points", 200)))
    samples = predict_grid_samples(model, _whiten_grid(x, metadata.get("whitening")),
                                   int(options.get("eval_M") or DEFAULT_EVAL_M), int(metadata.get("eval_seed", 0)))
    dataset_name = metadata.get("dataset")

    fig, ax = plt.subplots(figsize=(8, 5))
    if kind == "scatter":
        frame = _scatter_frame(ax, x, samples)
    elif kind == "interval":
        frame = _interval_frame(ax, x, samples, float(options.get("level", 0.95)))
    else:
        frame = _hpd_frame(ax, x, samples, float(options.get("hpd_level", 0.75)), options.get("bins"))
    _overlay_points(ax, train, dataset_name)
    _overlay_truth(ax, dataset_name, x, band=kind == "interval")
    ax.set_xlabel(train.x_columns[0])
    ax.set_ylabel(train.y_columns[0])
    ax.set_title(f"{metadata.get('method', model.config.head)} - {kind}")
    ax.legend(loc="upper left", fontsize="small")

    svg_path, csv_path = run_dir / f"plot_{kind}.svg", run_dir / f"plot_{kind}.csv"
    try:
        fig.savefig(svg_path, format="svg", metadata={"Date": None})
        frame.to_csv(csv_path, index=False, lineterminator="\n")
    except OSError as e:
        raise ArtifactError(f"Cannot write plot files to {run_dir}: {e}") from e
    finally:
        plt.close(fig)
    logger.info(f"Wrote {svg_path} and {csv_path}")
    return {"svg": svg_path, "csv": csv_path}
