#!/usr/bin/env python3
"""
SampleNet Toolkit - Main Entry Point
Distributional regression with sample-predicting networks
"""

import argparse
import asyncio
import json
import logging
import os
import sys
from typing import Any, Dict, List, Optional, Sequence

import yaml

from diffmath.errors import ConfigError, SampleNetError
from experiments.commands import cmd_compare, cmd_evaluate, cmd_generate, cmd_sweep, cmd_train
from experiments.config import LOG_LEVEL_ENV, METHODS, RunConfig, load_run_config
from experiments.plotting import PLOT_KINDS, cmd_plot

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="Path to a YAML or JSON run configuration")
    common.add_argument("--seed", type=int, help="Base seed for data, splits, initialization and training")
    common.add_argument("--out", help="Output directory")
    common.add_argument("--dataset", help="Toy generator name or CSV path")
    common.add_argument("--method", choices=METHODS, help="Model family")
    common.add_argument("--verbose", action="store_true", help="Log at DEBUG level")
    common.add_argument("overrides", nargs="*", help="Dotted overrides such as loss.eta=0.5")

    parser = argparse.ArgumentParser(description="SampleNet Toolkit - distributional regression with sample sets")
    commands = parser.add_subparsers(dest="command", required=True)

    commands.add_parser("generate", parents=[common], help="Write a toy dataset as CSV + manifest")

    train = commands.add_parser("train", parents=[common], help="Train on one split and write run artifacts")
    train.add_argument("--split", type=int, default=0, help="Split index to train on")

    sweep = commands.add_parser("sweep", parents=[common], help="Grid search, writes leaderboard.json")
    sweep.add_argument("--grid", action="append", default=[], metavar="AXIS=V1,V2",
                       help="Grid axis, e.g. eta=0,0.5 (replaces the configured grids)")

    evaluate = commands.add_parser("evaluate", parents=[common], help="Multi-split protocol, or compare reports")
    evaluate.add_argument("--compare", nargs="+", metavar="DIR", help="Report directories to compare with KS tests")
    evaluate.add_argument("--metric", default="es", choices=("es", "nll", "rmse"), help="Metric for --compare")

    plot = commands.add_parser("plot", parents=[common], help="Render a trained run as SVG + CSV")
    plot.add_argument("--run-dir", help="Run directory (defaults to the output directory)")
    plot.add_argument("--kind", choices=PLOT_KINDS, help="Plot kind")
    return parser


def configure_logging(cfg: Optional[RunConfig], verbose: bool):
    level = os.environ.get(LOG_LEVEL_ENV) or (cfg.logging.get("level") if cfg else None) or "INFO"
    if verbose:
        level = "DEBUG"
    logging.basicConfig(level=getattr(logging, str(level).upper(), logging.INFO), format=LOG_FORMAT, force=True)


def parse_grids(specs: Sequence[str]) -> Dict[str, List[Any]]:
    grids: Dict[str, List[Any]] = {}
    for spec in specs:
        if "=" not in spec:
            raise ConfigError(f"Grid axis '{spec}' is not of the form AXIS=V1,V2")
        axis, raw = spec.split("=", 1)
        grids[axis.strip()] = [yaml.safe_load(value) for value in raw.split(",") if value.strip()]
    return grids


async def run(args: argparse.Namespace) -> Any:
    cfg = load_run_config(args.config, vars(args), args.overrides)
    configure_logging(cfg, args.verbose)
    logger.info(f"Running '{args.command}' (method {cfg.method}, seed {cfg.seed}, out {cfg.output_dir})")

    if args.command == "generate":
        return {name: str(path) for name, path in cmd_generate(cfg).items()}
    if args.command == "train":
        return {name: str(path) for name, path in cmd_train(cfg, args.split).items()}
    if args.command == "sweep":
        result = await cmd_sweep(cfg, parse_grids(args.grid) or None)
        return {"leaderboard": str(result["path"]), "n_runs": result["n_runs"], "best": result["best"]}
    if args.command == "evaluate":
        if args.compare:
            return cmd_compare(args.compare, cfg.output_dir, args.metric)
        report = await cmd_evaluate(cfg)
        return {metric: {"mean": mean, "std": std} for metric, (mean, std) in report.aggregates.items()}
    options = dict(cfg.plot)
    kind = args.kind or options.get("kind", "interval")
    paths = cmd_plot(args.run_dir or options.get("run_dir") or cfg.output_dir, kind, options)
    return {name: str(path) for name, path in paths.items()}


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Command-line entry point; returns the process exit code"""
    args = build_parser().parse_args(argv)
    configure_logging(None, args.verbose)
    try:
        result = asyncio.run(run(args))
    except SampleNetError as e:
        logger.error(f"{args.command} failed: {e}")
        return e.exit_code
    except KeyboardInterrupt:
        logger.info("Received interrupt signal")
        return 130
    print(json.dumps(result, indent=2, sort_keys=True, default=str))
    return 0


if __name__ == "__main__":
    sys.exit(main())
