"""
Model Evaluation - Energy Score, Gaussian NLL and RMSE of a trained model on a test set
"""

import logging
from dataclasses import asdict, dataclass
from typing import Any, Dict, Optional

from data.dataset import Dataset
from diffmath.errors import DataError
from diffmath.rng import Rng
from diffmath.tensor import Tensor
from network.model import SampleNetModel, forward_gaussian, forward_samples
from scoring.rules import energy_score, gaussian_nll, gaussian_samples, rmse
from summaries.statistics import sample_mean, sample_moments

logger = logging.getLogger(__name__)

METRICS = ("es", "nll", "rmse")
DEFAULT_EVAL_M = 100


@dataclass(frozen=True)
class MetricsRecord:
    """Metrics of one split; nll is None when fewer than two samples are predicted"""

    split_index: int
    es: float
    nll: Optional[float]
    rmse: float
    n_test: int
    eval_M: int
    seed: int = 0

    def value(self, metric: str) -> Optional[float]:
        return getattr(self, metric)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, values: Dict[str, Any]) -> "MetricsRecord":
        return cls(**values)


def evaluate_model(
    model: SampleNetModel,
    test: Dataset,
    eval_M: Optional[int] = None,
    seed: int = 0,
    split_index: int = 0,
) -> MetricsRecord:
    """
    Score a trained model on held-out data

    A samples head is scored on its own M predicted samples; NLL uses their
    moments and RMSE their mean. A gaussian head is scored in closed form for
    NLL and RMSE and on eval_M samples drawn with `seed` for the Energy Score.
    """
    if test.n == 0:
        raise DataError("Cannot evaluate on an empty test set")
    X, Y = Tensor(test.X), Tensor(test.Y)
    if model.config.head == "samples":
        samples = forward_samples(model, X)
        M = model.config.M
        es = energy_score(samples, Y).item()
        nll = None
        if M >= 2:
            mean, var = sample_moments(samples)
            nll = gaussian_nll(mean, var, Y).item()
        error = rmse(sample_mean(samples), Y)
    else:
        M = eval_M or DEFAULT_EVAL_M
        mean, var = forward_gaussian(model, X)
        es = energy_score(gaussian_samples(mean, var, M, Rng(seed)), Y).item()
        nll = gaussian_nll(mean, var, Y).item()
        error = rmse(mean, Y)
    record = MetricsRecord(split_index=split_index, es=es, nll=nll, rmse=error, n_test=test.n, eval_M=M, seed=seed)
    logger.info(f"Split {split_index}: ES {es:.4f}, NLL {nll if nll is None else round(nll, 4)}, RMSE {error:.4f}")
    return record
