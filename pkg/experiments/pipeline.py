"""
Run Pipeline - Partitioning, model construction, training and scoring of one split
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

from data.dataset import Dataset, WhiteningStats
from data.splits import split, train_validation_split, whiten_inputs
from diffmath.rng import derive_seed
from evaluation.metrics import MetricsRecord, evaluate_model
from network.model import SampleNetModel
from network.trainer import TrainingHistory, train

from .config import RunConfig
from .generators import build_dataset, build_test_set

logger = logging.getLogger(__name__)

INIT_STREAM = 10
TRAIN_STREAM = 11
EVAL_STREAM = 12


@dataclass
class SplitData:
    """One split; `train` is the whole training partition, `fit` + `validation` its sub-split"""

    index: int
    raw_train: Dataset
    raw_test: Dataset
    train: Dataset
    fit: Dataset
    validation: Optional[Dataset]
    test: Dataset
    whitening: Optional[WhiteningStats]


def prepare_split(cfg: RunConfig, split_index: int = 0) -> SplitData:
    """Partition, whiten on the training rows, then carve out the validation rows"""
    dataset = build_dataset(cfg, split_index)
    independent_test = build_test_set(cfg, split_index)
    if independent_test is None:
        raw_train, raw_test = split(dataset, cfg.split, split_index)
    else:
        raw_train, raw_test = dataset, independent_test

    whitening = None
    train_set, test_set = raw_train, raw_test
    if cfg.dataset.get("whiten", True):
        train_set, test_set, whitening = whiten_inputs(raw_train, raw_test)
    fit, validation = train_validation_split(train_set, cfg.split, split_index)
    logger.info(
        f"Split {split_index}: {fit.n} fit / {0 if validation is None else validation.n} validation / {test_set.n} test rows"
    )
    return SplitData(split_index, raw_train, raw_test, train_set, fit, validation, test_set, whitening)


def build_model(cfg: RunConfig, data: SplitData, model_seed: Optional[int] = None) -> SampleNetModel:
    config = cfg.mlp_config(data.train.c, data.train.d)
    seed = cfg.seed if model_seed is None else model_seed
    return SampleNetModel.initialize(config, derive_seed(seed, INIT_STREAM, data.index))


def fit_split(
    cfg: RunConfig, data: SplitData, model_seed: Optional[int] = None
) -> Tuple[SampleNetModel, TrainingHistory]:
    """
    Train with early stopping on the validation rows

    model_seed replaces the run seed for initialization and minibatch streams only;
    data and partitions always follow cfg.seed.
    """
    seed = cfg.seed if model_seed is None else model_seed
    model = build_model(cfg, data, seed)
    schedule = cfg.schedule_for(derive_seed(seed, TRAIN_STREAM, data.index))
    return train(model, data.fit, data.validation, cfg.method_config(), schedule)


def retrain_full(cfg: RunConfig, data: SplitData, steps: int) -> Tuple[SampleNetModel, TrainingHistory]:
    """Retrain from the same initialization on the whole training partition for a fixed step count"""
    model = build_model(cfg, data)
    schedule = cfg.schedule_for(
        derive_seed(cfg.seed, TRAIN_STREAM, data.index), max_steps=steps, eval_every=max(steps, 1), patience=1
    )
    logger.info(f"Split {data.index}: retraining on {data.train.n} rows for {steps} steps")
    return train(model, data.train, None, cfg.method_config(), schedule)


def eval_seed(cfg: RunConfig, split_index: int) -> int:
    return derive_seed(cfg.seed, EVAL_STREAM, split_index)


def run_split(cfg: RunConfig, split_index: int) -> Tuple[MetricsRecord, TrainingHistory]:
    """Full protocol for one split: fit, optionally retrain on all training rows, score on test"""
    data = prepare_split(cfg, split_index)
    model, history = fit_split(cfg, data)
    if cfg.evaluation.get("retrain_on_full_train", True) and data.validation is not None and history.best_step:
        model, _ = retrain_full(cfg, data, history.best_step)
    record = evaluate_model(model, data.test, cfg.evaluation.get("eval_M"), eval_seed(cfg, split_index), split_index)
    return record, history
