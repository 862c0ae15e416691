"""
Commands - generate, train, sweep, evaluate and compare
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import yaml

from data.tables import write_csv, write_manifest
from diffmath.errors import ArtifactError, TrainingAborted
from evaluation.metrics import evaluate_model
from evaluation.report import MetricsReport, aggregate, read_report, write_report
from evaluation.significance import best_method, compare_methods, mark_top_performers
from network.model import save_checkpoint

from .config import RunConfig, thread_cap
from .generators import build_dataset, build_test_set
from .orchestrator import SweepOrchestrator, run_in_threads
from .pipeline import eval_seed, fit_split, prepare_split, run_split
from .sweep import plan_sweep

logger = logging.getLogger(__name__)

CHECKPOINT_FILE = "checkpoint.json"
HISTORY_FILE = "history.jsonl"
CONFIG_FILE = "config.resolved.yaml"
LEADERBOARD_FILE = "leaderboard.json"
COMPARISON_FILE = "comparison.json"


def _write_resolved_config(cfg: RunConfig, directory: Path) -> Path:
    path = directory / CONFIG_FILE
    try:
        directory.mkdir(parents=True, exist_ok=True)
        path.write_text(yaml.safe_dump(cfg.to_dict(), sort_keys=True), encoding="utf-8")
    except OSError as e:
        raise ArtifactError(f"Cannot write {path}: {e}") from e
    return path


def _run_metadata(cfg: RunConfig) -> Dict[str, Any]:
    return {
        "dataset": cfg.dataset.get("name") if cfg.dataset.get("name") != "csv" else cfg.dataset.get("path"),
        "method": cfg.method,
        "config": cfg.method_config().to_dict(),
        "model": cfg.model,
        "schedule": {key: value for key, value in cfg.schedule.to_dict().items() if key != "seed"},
        "seed": cfg.seed,
        "n_splits": cfg.split.n_splits,
    }


def cmd_generate(cfg: RunConfig) -> Dict[str, Path]:
    """Write the configured toy dataset (and its independent test set, if any) as CSV + manifest"""
    out = cfg.output_dir
    dataset = build_dataset(cfg)
    paths = {
        "dataset": write_csv(dataset, out / "dataset.csv"),
        "manifest": write_manifest(dataset, out / "dataset.manifest.json", seed=cfg.seed),
    }
    test = build_test_set(cfg)
    if test is not None:
        paths["test"] = write_csv(test, out / "test.csv")
        paths["test_manifest"] = write_manifest(test, out / "test.manifest.json", seed=cfg.seed)
    logger.info(f"Generated {dataset.n}-row '{cfg.dataset['name']}' dataset in {out}")
    return paths


def cmd_train(cfg: RunConfig, split_index: int = 0) -> Dict[str, Path]:
    """
    Train on one split and write its artifacts

    The output directory receives checkpoint.json, history.jsonl, report.jsonl +
    aggregate.json for the split's test set, the raw train/test CSVs and the
    resolved configuration.
    """
    out = cfg.output_dir
    data = prepare_split(cfg, split_index)
    write_csv(data.raw_train, out / "train.csv")
    write_csv(data.raw_test, out / "test.csv")
    _write_resolved_config(cfg, out)
    metadata = {
        **_run_metadata(cfg),
        "split_index": split_index,
        "whitening": None if data.whitening is None else data.whitening.to_dict(),
        "x_columns": list(data.train.x_columns),
        "y_columns": list(data.train.y_columns),
        "outlier_indices": list(data.raw_train.outlier_indices),
        "eval_seed": eval_seed(cfg, split_index),
    }

    try:
        model, history = fit_split(cfg, data)
    except TrainingAborted as e:
        logger.error(f"Training failed: {e}")
        if e.history is not None:
            e.history.write_jsonl(out / HISTORY_FILE)
        if e.model is not None:
            save_checkpoint(e.model, out / CHECKPOINT_FILE, {**metadata, "status": "aborted"})
        raise

    paths = {
        "checkpoint": save_checkpoint(model, out / CHECKPOINT_FILE, {**metadata, "status": "completed",
                                                                     "best_step": history.best_step}),
        "history": history.write_jsonl(out / HISTORY_FILE),
    }
    record = evaluate_model(model, data.test, cfg.evaluation.get("eval_M"), eval_seed(cfg, split_index), split_index)
    paths["report"], paths["aggregate"] = write_report(aggregate([record], metadata), out)
    return paths


async def cmd_evaluate(cfg: RunConfig) -> MetricsReport:
    """Run every split of the protocol concurrently and write the aggregate report"""
    splits = range(cfg.split.n_splits)
    workers = thread_cap()
    logger.info(f"Evaluating {cfg.method} on {cfg.split.n_splits} split(s) with {workers} worker(s)")
    results = await run_in_threads([lambda index=index: run_split(cfg, index) for index in splits], workers)
    report = aggregate([record for record, _ in results], _run_metadata(cfg))
    write_report(report, cfg.output_dir)
    for metric, (mean, std) in sorted(report.aggregates.items()):
        logger.info(f"{cfg.method} {metric}: {mean:.4f} +- {std:.4f}")
    return report


def cmd_compare(report_dirs: Sequence[Union[str, Path]], out: Union[str, Path], metric: str = "es",
                significance: float = 0.05) -> Dict[str, Any]:
    """KS comparison of several evaluate reports; writes comparison.json"""
    reports: Dict[str, MetricsReport] = {}
    for directory in report_dirs:
        report = read_report(directory)
        name = str(report.metadata.get("method") or Path(directory).name)
        if name in reports:
            name = f"{name}@{Path(directory).name}"
        reports[name] = report

    marked = mark_top_performers(reports, metric, significance)
    results = compare_methods(reports, metric)
    comparison = {
        "metric": metric,
        "significance": significance,
        "best": best_method(reports, metric),
        "marked": sorted(marked),
        "methods": {
            name: {
                "mean": report.aggregates[metric][0],
                "std": report.aggregates[metric][1],
                "ks_vs_best": results[name].to_dict(),
                "source": str(directory),
            }
            for (name, report), directory in zip(reports.items(), report_dirs)
        },
    }
    path = Path(out) / COMPARISON_FILE
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(comparison, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    except OSError as e:
        raise ArtifactError(f"Cannot write {path}: {e}") from e
    return comparison


async def cmd_sweep(cfg: RunConfig, grids: Optional[Dict[str, List[Any]]] = None) -> Dict[str, Any]:
    """One training run per valid grid point; writes leaderboard.json"""
    grids = grids or cfg.sweep["grids"]
    points, skipped = plan_sweep(grids, cfg)
    orchestrator = SweepOrchestrator(cfg)
    await orchestrator.run(points)
    path = orchestrator.store.write_leaderboard(cfg.output_dir / LEADERBOARD_FILE,
                                                {"grids": grids, "skipped": skipped})
    best = orchestrator.store.best()
    return {"path": path, "n_runs": len(points), "skipped": skipped, "best": best}
