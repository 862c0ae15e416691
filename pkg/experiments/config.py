"""
Run Configuration - YAML defaults, file settings, CLI flags and dotted overrides
"""

import copy
import logging
import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Sequence, Tuple, Union

import yaml
from dotenv import load_dotenv

from data.dataset import SplitSpec
from diffmath.errors import ConfigError
from network.model import MlpConfig
from network.trainer import TrainSchedule
from scoring.config import BaselineConfig, LossConfig

logger = logging.getLogger(__name__)

METHODS = ("samplenet", "beta_nll")
TOY_DATASETS = ("unimodal", "multimodal")
THREADS_ENV = "SAMPLENET_THREADS"
LOG_LEVEL_ENV = "SAMPLENET_LOG_LEVEL"

DEFAULTS: Dict[str, Any] = {
    "dataset": {
        "name": "unimodal",
        "n": 500,
        "outliers": 0,
        "noise_scale": 0.3,
        "test_n": None,
        "path": None,
        "target_columns": None,
        "whiten": True,
    },
    "method": "samplenet",
    "model": {"hidden_sizes": [50], "activation": "tanh"},
    "loss": {},
    "baseline": {},
    "schedule": {},
    "split": {},
    "evaluation": {"eval_M": None, "retrain_on_full_train": True, "level": 0.95},
    "sweep": {
        "grids": {"M": [50, 100, 200, 400], "K": [50, 100, 200], "L": [1, 2, 3, 4], "eta": [0.0, 0.1, 0.5, 1.0, 5.0]},
        "metric": None,
        "max_workers": None,
        "split_index": 0,
    },
    "plot": {"kind": "interval", "level": 0.95, "hpd_level": 0.75, "bins": None, "grid_points": 200},
    "logging": {"level": "INFO"},
    "output_dir": "runs/default",
    "seed": 0,
}

SECTION_KEYS = {
    "dataset": set(DEFAULTS["dataset"]),
    "model": set(DEFAULTS["model"]),
    "evaluation": set(DEFAULTS["evaluation"]),
    "sweep": set(DEFAULTS["sweep"]),
    "plot": set(DEFAULTS["plot"]) | {"run_dir"},
    "logging": set(DEFAULTS["logging"]),
}


def _merge(base: Dict[str, Any], update: Mapping[str, Any]) -> Dict[str, Any]:
    merged = copy.deepcopy(base)
    for key, value in update.items():
        if key not in merged:
            raise ConfigError(f"Unknown config section '{key}'")
        if isinstance(merged[key], dict) and isinstance(value, Mapping):
            merged[key].update(value)
        else:
            merged[key] = value
    return merged


def parse_override(text: str) -> Tuple[str, Any]:
    """'loss.eta=0.5' -> ('loss.eta', 0.5), the value parsed as YAML"""
    if "=" not in text:
        raise ConfigError(f"Override '{text}' is not of the form section.key=value")
    dotted, raw = text.split("=", 1)
    parts = [part for part in dotted.strip().split(".") if part]
    if not parts:
        raise ConfigError(f"Override '{text}' names no key")
    try:
        value = yaml.safe_load(raw) if raw.strip() else None
    except yaml.YAMLError as e:
        raise ConfigError(f"Cannot parse override value in '{text}': {e}") from e
    return ".".join(parts), value


def apply_dotted(raw: Dict[str, Any], overrides: Mapping[str, Any]) -> Dict[str, Any]:
    """Apply {'loss.eta': 0.5, ...} style overrides to a raw config mapping"""
    updated = copy.deepcopy(raw)
    for dotted, value in overrides.items():
        parts = dotted.split(".")
        if parts[0] not in updated:
            raise ConfigError(f"Unknown config section '{parts[0]}'")
        target = updated
        for part in parts[:-1]:
            target = target.setdefault(part, {})
            if not isinstance(target, dict):
                raise ConfigError(f"'{dotted}' descends into a non-mapping value")
        target[parts[-1]] = value
    return updated


@dataclass
class RunConfig:
    """Fully validated settings of one run"""

    dataset: Dict[str, Any]
    method: str
    model: Dict[str, Any]
    loss: LossConfig
    baseline: BaselineConfig
    schedule: TrainSchedule
    split: SplitSpec
    evaluation: Dict[str, Any]
    sweep: Dict[str, Any]
    plot: Dict[str, Any]
    logging: Dict[str, Any]
    output_dir: Path
    seed: int
    raw: Dict[str, Any] = field(default_factory=dict, repr=False)

    @classmethod
    def from_dict(cls, values: Mapping[str, Any]) -> "RunConfig":
        raw = _merge(DEFAULTS, values)
        for section, allowed in SECTION_KEYS.items():
            if not isinstance(raw[section], dict):
                raise ConfigError(f"Config section '{section}' must be a mapping")
            unknown = sorted(set(raw[section]) - allowed)
            if unknown:
                raise ConfigError(f"Unknown keys in '{section}': {unknown}")

        method = raw["method"]
        if method not in METHODS:
            raise ConfigError(f"method must be one of {METHODS}, got '{method}'")
        try:
            seed = int(raw["seed"])
        except (TypeError, ValueError) as e:
            raise ConfigError(f"seed must be an integer, got {raw['seed']!r}") from e

        split_values = dict(raw["split"] or {})
        split_values["base_seed"] = seed
        config = cls(
            dataset=dict(raw["dataset"]),
            method=method,
            model=dict(raw["model"]),
            loss=LossConfig.from_dict(raw["loss"]),
            baseline=BaselineConfig.from_dict(raw["baseline"]),
            schedule=TrainSchedule.from_dict(raw["schedule"]),
            split=SplitSpec.from_dict(split_values),
            evaluation=dict(raw["evaluation"]),
            sweep=dict(raw["sweep"]),
            plot=dict(raw["plot"]),
            logging=dict(raw["logging"]),
            output_dir=Path(raw["output_dir"]),
            seed=seed,
            raw=raw,
        )
        config._check_dataset_source()
        return config

    def _check_dataset_source(self):
        name, path = self.dataset.get("name"), self.dataset.get("path")
        if name == "csv":
            if not path:
                raise ConfigError("A csv dataset needs dataset.path")
        elif name in TOY_DATASETS:
            if path:
                raise ConfigError(f"Toy dataset '{name}' cannot also set dataset.path")
            if int(self.dataset.get("n") or 0) < 1:
                raise ConfigError(f"dataset.n must be >= 1, got {self.dataset.get('n')}")
        else:
            raise ConfigError(f"dataset.name must be one of {TOY_DATASETS + ('csv',)}, got '{name}'")

    @property
    def head(self) -> str:
        return "samples" if self.method == "samplenet" else "gaussian"

    def method_config(self) -> Union[LossConfig, BaselineConfig]:
        return self.loss if self.method == "samplenet" else self.baseline

    def mlp_config(self, input_dim: int, output_dim: int) -> MlpConfig:
        return MlpConfig(
            input_dim=input_dim,
            output_dim=output_dim,
            hidden_sizes=list(self.model["hidden_sizes"]),
            activation=self.model["activation"],
            head=self.head,
            M=self.loss.M,
        )

    def schedule_for(self, seed: int, **changes: Any) -> TrainSchedule:
        return replace(self.schedule, seed=seed, **changes)

    def with_overrides(self, overrides: Mapping[str, Any], seed: Optional[int] = None,
                       output_dir: Optional[Path] = None) -> "RunConfig":
        """A copy with dotted overrides applied (e.g. {'loss.eta': 0.5})"""
        raw = apply_dotted(self.raw, overrides)
        if seed is not None:
            raw["seed"] = seed
        if output_dir is not None:
            raw["output_dir"] = str(output_dir)
        return RunConfig.from_dict(raw)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "dataset": self.dataset,
            "method": self.method,
            "model": self.model,
            "loss": self.loss.to_dict(),
            "baseline": self.baseline.to_dict(),
            "schedule": {key: value for key, value in self.schedule.to_dict().items() if key != "seed"},
            "split": {key: value for key, value in vars(self.split).items() if key != "base_seed"},
            "evaluation": self.evaluation,
            "sweep": self.sweep,
            "plot": self.plot,
            "logging": self.logging,
            "output_dir": str(self.output_dir),
            "seed": self.seed,
        }


def read_config_file(path: Union[str, Path]) -> Dict[str, Any]:
    """Load a YAML (or JSON) config file"""
    try:
        with open(path, "r", encoding="utf-8") as file:
            loaded = yaml.safe_load(file)
    except FileNotFoundError as e:
        raise ConfigError(f"Config file not found: {path}") from e
    except yaml.YAMLError as e:
        logger.error(f"Failed to load config: {e}")
        raise ConfigError(f"Cannot parse config file {path}: {e}") from e
    if loaded is None:
        return {}
    if not isinstance(loaded, dict):
        raise ConfigError(f"Config file {path} must hold a mapping at the top level")
    return loaded


def flag_overrides(flags: Mapping[str, Any], generators: Sequence[str] = TOY_DATASETS) -> Dict[str, Any]:
    """Translate --seed/--out/--dataset/--method flags into dotted overrides"""
    dotted: Dict[str, Any] = {}
    if flags.get("seed") is not None:
        dotted["seed"] = int(flags["seed"])
    if flags.get("out") is not None:
        dotted["output_dir"] = str(flags["out"])
    if flags.get("method") is not None:
        dotted["method"] = flags["method"]
    dataset = flags.get("dataset")
    if dataset is not None:
        if dataset in generators:
            dotted["dataset.name"] = dataset
            dotted["dataset.path"] = None
        else:
            dotted["dataset.name"] = "csv"
            dotted["dataset.path"] = str(dataset)
    return dotted


def load_run_config(
    path: Optional[Union[str, Path]] = None,
    flags: Optional[Mapping[str, Any]] = None,
    overrides: Sequence[str] = (),
) -> RunConfig:
    """
    Resolve a RunConfig

    Precedence, lowest first: built-in defaults, the config file, CLI flags,
    dotted overrides such as 'loss.eta=0.5'. A .env file is read so
    SAMPLENET_THREADS and SAMPLENET_LOG_LEVEL can be set there.
    """
    load_dotenv()
    raw = _merge(DEFAULTS, read_config_file(path)) if path else copy.deepcopy(DEFAULTS)
    raw = apply_dotted(raw, flag_overrides(flags or {}))
    for text in overrides:
        dotted_key, value = parse_override(text)
        raw = apply_dotted(raw, {dotted_key: value})
    config = RunConfig.from_dict(raw)
    logger.debug(f"Resolved run config: {config.to_dict()}")
    return config


def thread_cap(default: int = 1) -> int:
    """Worker cap from SAMPLENET_THREADS (at least 1)"""
    raw = os.environ.get(THREADS_ENV)
    if raw is None or not raw.strip():
        return max(default, 1)
    try:
        return max(int(raw), 1)
    except ValueError as e:
        raise ConfigError(f"{THREADS_ENV} must be an integer, got '{raw}'") from e
