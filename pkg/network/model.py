"""
SampleNet Model - MLP trunk with a sample head or a Gaussian variance head
"""

import json
import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np

from diffmath.errors import ArtifactError, ConfigError, ContractError, ShapeError
from diffmath.rng import Rng
from diffmath.tensor import Tensor, as_tensor, elu, softplus, tanh

logger = logging.getLogger(__name__)

ACTIVATIONS = {"tanh": tanh, "elu": elu}
HEADS = ("samples", "gaussian")
VAR_FLOOR = 1e-6
CHECKPOINT_FORMAT = "samplenet-checkpoint"
CHECKPOINT_VERSION = 1


@dataclass
class MlpConfig:
    """Architecture of the shared trunk and its output head"""

    input_dim: int
    output_dim: int = 1
    hidden_sizes: List[int] = field(default_factory=lambda: [50])
    activation: str = "tanh"
    head: str = "samples"
    M: int = 100

    def __post_init__(self):
        self.input_dim, self.output_dim, self.M = int(self.input_dim), int(self.output_dim), int(self.M)
        self.hidden_sizes = [int(size) for size in self.hidden_sizes]
        if self.input_dim < 1 or self.output_dim < 1 or any(size < 1 for size in self.hidden_sizes):
            raise ConfigError(f"All layer dims must be positive: {self}")
        if self.activation not in ACTIVATIONS:
            raise ConfigError(f"activation must be one of {sorted(ACTIVATIONS)}, got '{self.activation}'")
        if self.head not in HEADS:
            raise ConfigError(f"head must be one of {HEADS}, got '{self.head}'")
        if self.head == "samples" and self.M < 1:
            raise ConfigError(f"Sample head needs M >= 1, got {self.M}")

    @property
    def output_width(self) -> int:
        if self.head == "samples":
            return self.M * self.output_dim
        return 2 * self.output_dim

    @property
    def layer_sizes(self) -> List[int]:
        return [self.input_dim, *self.hidden_sizes, self.output_width]

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, values: Dict[str, Any]) -> "MlpConfig":
        return cls(**values)


class SampleNetModel:
    """Fully connected network; parameters are requires_grad Tensors"""

    def __init__(self, config: MlpConfig, layers: List[Tuple[Tensor, Tensor]], seed: Optional[int] = None):
        self.config = config
        self.layers = layers
        self.seed = seed
        self._check_layers()

    @classmethod
    def initialize(cls, config: MlpConfig, seed: int) -> "SampleNetModel":
        """Uniform weights in +-sqrt(6 / (fan_in + fan_out)), zero biases"""
        rng = Rng(seed)
        sizes = config.layer_sizes
        layers = []
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
            bound = math.sqrt(6.0 / (fan_in + fan_out))
            weight = rng.uniform(-bound, bound, (fan_in, fan_out))
            layers.append((Tensor(weight, requires_grad=True), Tensor(np.zeros(fan_out), requires_grad=True)))
        logger.info(f"Initialized {config.head} network with layers {sizes} (seed={seed})")
        return cls(config, layers, seed)

    def _check_layers(self):
        sizes = self.config.layer_sizes
        if len(self.layers) != len(sizes) - 1:
            raise ShapeError(f"Expected {len(sizes) - 1} layers, got {len(self.layers)}")
        for (weight, bias), fan_in, fan_out in zip(self.layers, sizes[:-1], sizes[1:]):
            if weight.shape != (fan_in, fan_out) or bias.shape != (fan_out,):
                raise ShapeError(f"Layer shapes {list(weight.shape)}/{list(bias.shape)} do not chain as {sizes}")

    def parameters(self) -> List[Tensor]:
        return [tensor for layer in self.layers for tensor in layer]

    def snapshot(self) -> List[np.ndarray]:
        return [param.values.copy() for param in self.parameters()]

    def restore(self, snapshot: List[np.ndarray]):
        for param, values in zip(self.parameters(), snapshot):
            param.values = values.copy()

    def copy(self) -> "SampleNetModel":
        layers = [
            (Tensor(weight.values, requires_grad=True), Tensor(bias.values, requires_grad=True))
            for weight, bias in self.layers
        ]
        return SampleNetModel(MlpConfig.from_dict(self.config.to_dict()), layers, self.seed)

    def forward(self, X: Any) -> Tensor:
        """Raw output layer, N x output_width"""
        X = as_tensor(X)
        if X.ndim != 2 or X.shape[1] != self.config.input_dim:
            raise ShapeError(f"Expected inputs N x {self.config.input_dim}, got {list(X.shape)}")
        activation = ACTIVATIONS[self.config.activation]
        hidden = X
        last = len(self.layers) - 1
        for index, (weight, bias) in enumerate(self.layers):
            hidden = hidden @ weight + bias
            if index < last:
                hidden = activation(hidden)
        return hidden


def forward_samples(model: SampleNetModel, X: Any) -> Tensor:
    """Predicted sample sets, N x M x d"""
    if model.config.head != "samples":
        raise ContractError("forward_samples needs a model with a samples head")
    raw = model.forward(X)
    return raw.reshape(raw.shape[0], model.config.M, model.config.output_dim)


def forward_gaussian(model: SampleNetModel, X: Any) -> Tuple[Tensor, Tensor]:
    """Mean and variance (softplus + VAR_FLOOR), each N x d"""
    if model.config.head != "gaussian":
        raise ContractError("forward_gaussian needs a model with a gaussian head")
    raw = model.forward(X)
    d = model.config.output_dim
    mean = raw[:, :d]
    var = softplus(raw[:, d:]) + VAR_FLOOR
    return mean, var


def save_checkpoint(model: SampleNetModel, path: Union[str, Path], metadata: Optional[Dict[str, Any]] = None) -> Path:
    """
    Write a JSON checkpoint

    Layout: {format, version, config, seed, layers: [{weight_shape, weight,
    bias_shape, bias}], metadata}. Weights are flat row-major lists; JSON floats
    round-trip float64 exactly.
    """
    path = Path(path)
    payload = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "config": model.config.to_dict(),
        "seed": model.seed,
        "layers": [
            {
                "weight_shape": list(weight.shape),
                "weight": weight.values.reshape(-1).tolist(),
                "bias_shape": list(bias.shape),
                "bias": bias.values.reshape(-1).tolist(),
            }
            for weight, bias in model.layers
        ],
        "metadata": metadata or {},
    }
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(payload, sort_keys=True), encoding="utf-8")
    except OSError as exc:
        raise ArtifactError(f"Cannot write checkpoint {path}: {exc}") from exc
    logger.info(f"Saved checkpoint to {path}")
    return path


def load_checkpoint(path: Union[str, Path]) -> Tuple[SampleNetModel, Dict[str, Any]]:
    """Read a checkpoint written by save_checkpoint; returns (model, metadata)"""
    path = Path(path)
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, ValueError) as exc:
        raise ArtifactError(f"Cannot read checkpoint {path}: {exc}") from exc
    if payload.get("format") != CHECKPOINT_FORMAT or payload.get("version") != CHECKPOINT_VERSION:
        raise ArtifactError(f"{path} is not a version {CHECKPOINT_VERSION} SampleNet checkpoint")

    layers = []
    for layer in payload["layers"]:
        weight = np.asarray(layer["weight"], dtype=np.float64).reshape(layer["weight_shape"])
        bias = np.asarray(layer["bias"], dtype=np.float64).reshape(layer["bias_shape"])
        layers.append((Tensor(weight, requires_grad=True), Tensor(bias, requires_grad=True)))
    model = SampleNetModel(MlpConfig.from_dict(payload["config"]), layers, payload.get("seed"))
    return model, payload.get("metadata", {})
