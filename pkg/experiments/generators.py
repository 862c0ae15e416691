"""
Dataset Generators - Registry of toy generators and dataset construction for runs
"""

import logging
from typing import Any, Callable, Dict, Optional

from data.dataset import Dataset
from data.tables import load_dataset
from data.toy import gen_multimodal_toy, gen_unimodal_toy
from diffmath.errors import ConfigError
from diffmath.rng import Rng, derive_seed

from .config import RunConfig

logger = logging.getLogger(__name__)

GeneratorFn = Callable[[Dict[str, Any], int, Rng], Dataset]

DATA_STREAM = 0
TEST_STREAM = 1


def _unimodal(params: Dict[str, Any], n: int, rng: Rng) -> Dataset:
    return gen_unimodal_toy(n, rng, with_outliers=int(params.get("outliers") or 0),
                            noise_scale=float(params.get("noise_scale", 0.3)))


def _multimodal(params: Dict[str, Any], n: int, rng: Rng) -> Dataset:
    return gen_multimodal_toy(n, rng, noise_scale=float(params.get("noise_scale", 0.3)))


def initialize_generators(config: Optional[Dict[str, Any]] = None) -> Dict[str, GeneratorFn]:
    """
    Build the name -> generator registry

    Args:
        config: Raw run configuration; only its dataset section is inspected

    Returns:
        Dictionary of generator callables taking (params, n, rng)
    """
    logger.debug("Initializing dataset generators")
    generators: Dict[str, GeneratorFn] = {
        "unimodal": _unimodal,
        "multimodal": _multimodal,
    }
    requested = ((config or {}).get("dataset") or {}).get("name")
    if requested not in (None, "csv") and requested not in generators:
        raise ConfigError(f"No generator named '{requested}'; known: {sorted(generators)}")
    return generators


def generate_toy(cfg: RunConfig, stream: int = DATA_STREAM, index: int = 0, n: Optional[int] = None) -> Dataset:
    generator = initialize_generators(cfg.raw)[cfg.dataset["name"]]
    params = dict(cfg.dataset)
    if stream == TEST_STREAM:
        params["outliers"] = 0
    rng = Rng(derive_seed(cfg.seed, stream, index))
    return generator(params, int(n or cfg.dataset["n"]), rng)


def build_dataset(cfg: RunConfig, index: int = 0) -> Dataset:
    """The dataset a run draws its partitions from"""
    if cfg.dataset["name"] == "csv":
        return load_dataset(cfg.dataset["path"], target_columns=cfg.dataset.get("target_columns"))
    return generate_toy(cfg, DATA_STREAM, index)


def build_test_set(cfg: RunConfig, index: int = 0) -> Optional[Dataset]:
    """Independent outlier-free toy test set when dataset.test_n is set"""
    test_n = cfg.dataset.get("test_n")
    if cfg.dataset["name"] == "csv" or not test_n:
        return None
    return generate_toy(cfg, TEST_STREAM, index, n=int(test_n))
