"""
Training Loop - Minibatch Adam on the combined SampleNet loss or the beta-NLL baseline
"""

import json
import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np

from data.dataset import Dataset
from diffmath.errors import ConfigError, ContractError, DataError, NumericError, ShapeError, TrainingAborted
from diffmath.rng import Rng, derive_seed
from diffmath.tensor import Tape, Tensor, as_tensor
from scoring.config import BaselineConfig, LossConfig
from scoring.rules import beta_nll, energy_score, gaussian_nll, gaussian_samples, minibatch_energy_score
from summaries.statistics import sample_moments
from transport.minibatch import TransportStats, minibatch_sinkhorn

from .model import SampleNetModel, forward_gaussian, forward_samples
from .optimizer import AdamState, adam_step

logger = logging.getLogger(__name__)

VALIDATION_METRICS = ("es", "nll")


@dataclass
class TrainSchedule:
    """
    Optimization schedule

    minibatch_size None trains on the full batch every step. validation_metric
    None picks ES for the sample head and NLL for the Gaussian head.
    """

    max_steps: int = 2500
    minibatch_size: Optional[int] = 256
    learning_rate: float = 1e-3
    eval_every: int = 100
    patience: int = 10
    validation_metric: Optional[str] = None
    eval_M: int = 100
    seed: int = 0

    def __post_init__(self):
        self.max_steps, self.eval_every, self.patience = int(self.max_steps), int(self.eval_every), int(self.patience)
        self.learning_rate, self.eval_M, self.seed = float(self.learning_rate), int(self.eval_M), int(self.seed)
        if self.max_steps < 0:
            raise ConfigError(f"max_steps must be >= 0, got {self.max_steps}")
        if self.minibatch_size is not None:
            self.minibatch_size = int(self.minibatch_size)
            if self.minibatch_size < 1:
                raise ConfigError(f"minibatch_size must be >= 1, got {self.minibatch_size}")
        if not self.learning_rate > 0:
            raise ConfigError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.eval_every < 1 or self.patience < 1:
            raise ConfigError("eval_every and patience must be >= 1")
        if self.validation_metric is not None and self.validation_metric not in VALIDATION_METRICS:
            raise ConfigError(f"validation_metric must be one of {VALIDATION_METRICS}, got '{self.validation_metric}'")
        if self.eval_M < 2:
            raise ConfigError(f"eval_M must be >= 2, got {self.eval_M}")

    @classmethod
    def from_dict(cls, values: Optional[Dict[str, Any]]) -> "TrainSchedule":
        values = dict(values or {})
        unknown = sorted(set(values) - set(cls.__dataclass_fields__))
        if unknown:
            raise ConfigError(f"Unknown TrainSchedule keys: {unknown}")
        return cls(**values)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class TrainingHistory:
    """Per-step training loss and per-check validation metric"""

    metric: str
    train_loss: List[Tuple[int, float]] = field(default_factory=list)
    validation: List[Dict[str, Any]] = field(default_factory=list)
    best_step: Optional[int] = None
    best_value: float = math.inf
    steps_run: int = 0
    stopped_early: bool = False
    aborted: Optional[str] = None
    transport: TransportStats = field(default_factory=TransportStats)

    def record_loss(self, step: int, value: float):
        self.train_loss.append((step, value))
        self.steps_run = step

    def record_check(self, step: int, value: float) -> bool:
        improved = value < self.best_value
        if improved:
            self.best_value, self.best_step = value, step
        self.validation.append({"step": step, "metric": self.metric, "value": value, "best_so_far": self.best_value})
        return improved

    def to_records(self) -> List[Dict[str, Any]]:
        records: List[Dict[str, Any]] = [{"kind": "train", "step": step, "loss": loss} for step, loss in self.train_loss]
        records.extend({"kind": "validation", **check} for check in self.validation)
        records.append(
            {
                "kind": "summary",
                "metric": self.metric,
                "best_step": self.best_step,
                "best_value": self.best_value if self.best_step is not None else None,
                "steps_run": self.steps_run,
                "stopped_early": self.stopped_early,
                "aborted": self.aborted,
                "transport": self.transport.to_dict(),
            }
        )
        return records

    def write_jsonl(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8") as handle:
            for record in self.to_records():
                handle.write(json.dumps(record, sort_keys=True) + "\n")
        return path


def combined_loss(
    samples: Any,
    targets: Any,
    cfg: LossConfig,
    rng: Rng,
    stats: Optional[TransportStats] = None,
) -> Tensor:
    """Minibatch Energy Score plus eta times the minibatch Sinkhorn regularizer"""
    samples = as_tensor(samples)
    if cfg.eta < 0:
        raise ConfigError(f"eta must be >= 0, got {cfg.eta}")
    if samples.ndim != 3 or samples.shape[1] != cfg.M:
        raise ContractError(f"Loss configured for M={cfg.M}, samples have shape {list(samples.shape)}")
    loss = minibatch_energy_score(samples, targets, cfg.K, cfg.L, rng=rng)
    if cfg.eta == 0.0:
        return loss
    return loss + cfg.eta * minibatch_sinkhorn(samples, cfg, rng, stats=stats)


def _check_compatible(model: SampleNetModel, cfg: Union[LossConfig, BaselineConfig]):
    if model.config.head == "samples" and not isinstance(cfg, LossConfig):
        raise ConfigError("A samples head trains with a LossConfig")
    if model.config.head == "gaussian" and not isinstance(cfg, BaselineConfig):
        raise ConfigError("A gaussian head trains with a BaselineConfig")
    if isinstance(cfg, LossConfig) and cfg.M != model.config.M:
        raise ConfigError(f"LossConfig M={cfg.M} does not match the model head M={model.config.M}")


def _check_dataset(dataset: Dataset, model: SampleNetModel, role: str):
    if dataset.n == 0:
        raise DataError(f"The {role} set is empty")
    if dataset.c != model.config.input_dim or dataset.d != model.config.output_dim:
        raise ShapeError(
            f"The {role} set is {dataset.c} -> {dataset.d}, model expects {model.config.input_dim} -> {model.config.output_dim}"
        )


def training_loss(
    model: SampleNetModel,
    X: Tensor,
    Y: Tensor,
    cfg: Union[LossConfig, BaselineConfig],
    rng: Rng,
    stats: Optional[TransportStats] = None,
) -> Tensor:
    if model.config.head == "samples":
        return combined_loss(forward_samples(model, X), Y, cfg, rng, stats)
    mean, var = forward_gaussian(model, X)
    return beta_nll(mean, var, Y, cfg.beta)


def validation_score(model: SampleNetModel, dataset: Dataset, metric: str, eval_M: int = 100, seed: int = 0) -> float:
    """
    Full Energy Score or Gaussian NLL of a model on a dataset

    Gaussian-head ES uses eval_M samples drawn from the predicted Gaussian with a
    fixed seed, so successive checks are comparable. Sample-head NLL uses the
    sample moments.
    """
    if metric not in VALIDATION_METRICS:
        raise ConfigError(f"Unknown validation metric '{metric}'")
    X, Y = Tensor(dataset.X), Tensor(dataset.Y)
    if model.config.head == "samples":
        samples = forward_samples(model, X)
        if metric == "es":
            return energy_score(samples, Y).item()
        mean, var = sample_moments(samples)
        return gaussian_nll(mean, var, Y).item()
    mean, var = forward_gaussian(model, X)
    if metric == "nll":
        return gaussian_nll(mean, var, Y).item()
    return energy_score(gaussian_samples(mean, var, eval_M, Rng(seed)), Y).item()


def train(
    model: SampleNetModel,
    train_set: Dataset,
    val_set: Optional[Dataset],
    cfg: Union[LossConfig, BaselineConfig],
    sched: TrainSchedule,
) -> Tuple[SampleNetModel, TrainingHistory]:
    """
    Train in place and return the best validated parameters

    Every eval_every steps (and after the last step) the validation metric is
    computed on val_set, or on train_set when no validation set is given.
    Training stops after `patience` checks without improvement. A non-finite
    loss or gradient raises TrainingAborted with the model holding the
    parameters of the last successful step.

    Returns:
        (model, history)
    """
    _check_compatible(model, cfg)
    _check_dataset(train_set, model, "training")
    monitor = train_set if val_set is None else val_set
    _check_dataset(monitor, model, "validation")

    metric = sched.validation_metric or ("es" if model.config.head == "samples" else "nll")
    history = TrainingHistory(metric=metric)
    root = Rng(sched.seed)
    batch_rng, loss_rng = root.spawn(1), root.spawn(2)
    check_seed = derive_seed(sched.seed, 3)

    params = model.parameters()
    state = AdamState(lr=sched.learning_rate)
    best_snapshot = model.snapshot()
    stale_checks = 0
    n_train = train_set.n
    batch = n_train if sched.minibatch_size is None else min(sched.minibatch_size, n_train)
    logger.info(
        f"Training {model.config.head} model: {n_train} rows, batch {batch}, "
        f"max {sched.max_steps} steps, lr {sched.learning_rate}, early stop on {metric}"
    )

    for step in range(1, sched.max_steps + 1):
        rows = np.arange(n_train) if batch == n_train else np.sort(batch_rng.choice(n_train, batch))
        X, Y = Tensor(train_set.X[rows]), Tensor(train_set.Y[rows])
        try:
            with Tape() as tape:
                tape.watch(params)
                for param in params:
                    param.zero_grad()
                loss = training_loss(model, X, Y, cfg, loss_rng, history.transport)
                grads = tape.backward(loss)
            adam_step(params, grads, state)
        except NumericError as e:
            history.aborted = f"step {step}: {e}"
            logger.warning(f"Training aborted at step {step}: {e}")
            raise TrainingAborted(f"Training aborted at step {step}: {e}", model=model, history=history) from e
        history.record_loss(step, loss.item())

        if step % sched.eval_every == 0 or step == sched.max_steps:
            value = validation_score(model, monitor, metric, sched.eval_M, check_seed)
            if not math.isfinite(value):
                history.aborted = f"step {step}: non-finite validation {metric}"
                raise TrainingAborted(history.aborted, model=model, history=history)
            if history.record_check(step, value):
                best_snapshot = model.snapshot()
                stale_checks = 0
            else:
                stale_checks += 1
            logger.debug(f"Step {step}: loss {loss.item():.6f}, validation {metric} {value:.6f}")
            if stale_checks >= sched.patience:
                history.stopped_early = True
                logger.info(f"Early stop at step {step}, best {metric} {history.best_value:.6f} at step {history.best_step}")
                break

    if history.best_step is not None:
        model.restore(best_snapshot)
        logger.info(f"Training finished after {history.steps_run} steps, best {metric} {history.best_value:.6f}")
    if history.transport.degenerate_skipped or history.transport.nonconverged:
        logger.warning(
            f"Sinkhorn regularizer skipped {history.transport.degenerate_skipped} degenerate subsets "
            f"and had {history.transport.nonconverged} non-converged solves"
        )
    return model, history
