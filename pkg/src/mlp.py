"""Multilayer perceptron with sigmoid output, trained by backpropagation and mini-batch SGD.

Each layer computes S = W a + b followed by its activation. Hidden layers may
apply inverted dropout in train mode; the loss is mean binary cross-entropy
plus an L2 penalty on the weight matrices (biases excluded).
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from src.exceptions import DivergenceError, ShapeError, StaleCacheError
from src.models import Activation, LayerSpec, TrainConfig, TrainHistory
from src.preprocess import NumericDataset

logger = logging.getLogger(__name__)

MODEL_FORMAT_VERSION = 1

# Probabilities are clamped to [PROBABILITY_CLAMP, 1 - PROBABILITY_CLAMP] before the log.
PROBABILITY_CLAMP = 1e-12


def sigmoid(s):
    """Logistic function 1 / (1 + exp(-s)), stable for large |s|."""
    s = np.asarray(s, dtype=np.float64)
    e = np.exp(-np.abs(s))
    out = np.where(s >= 0, 1.0 / (1.0 + e), e / (1.0 + e))
    return float(out) if out.ndim == 0 else out


def relu(s: np.ndarray) -> np.ndarray:
    return np.maximum(s, 0.0)


class ForwardMode(str, Enum):
    """Train mode applies dropout; eval mode does not."""
    TRAIN = "train"
    EVAL = "eval"


@dataclass
class ForwardCache:
    """Intermediate values of one forward pass, consumed by backward."""
    model_id: int
    model_version: int
    mode: ForwardMode
    inputs: List[np.ndarray] = field(default_factory=list)
    pre_activations: List[np.ndarray] = field(default_factory=list)
    activations: List[np.ndarray] = field(default_factory=list)
    masks: List[Optional[np.ndarray]] = field(default_factory=list)
    outputs: List[np.ndarray] = field(default_factory=list)

    @property
    def batch_size(self) -> int:
        return self.inputs[0].shape[0]


@dataclass
class Gradients:
    """Loss gradients, shaped like the model's weights and biases."""
    weights: List[np.ndarray]
    biases: List[np.ndarray]


class MlpState(BaseModel):
    """JSON form of an Mlp."""
    model_config = ConfigDict(frozen=True)

    format_version: int = MODEL_FORMAT_VERSION
    input_dim: int = Field(..., ge=1)
    layers: List[LayerSpec]
    l2_lambda: float = Field(..., ge=0.0)
    weights: List[List[List[float]]]
    biases: List[List[float]]


class Mlp:
    """Fully connected feed-forward network ending in one sigmoid unit."""

    def __init__(
        self,
        input_dim: int,
        layers: Sequence[LayerSpec],
        weights: Sequence[np.ndarray],
        biases: Sequence[np.ndarray],
        l2_lambda: float = 1e-4,
    ):
        _check_layers(input_dim, layers)
        if l2_lambda < 0:
            raise ShapeError(f"l2_lambda must be >= 0, got {l2_lambda}")
        if len(weights) != len(layers) or len(biases) != len(layers):
            raise ShapeError(
                f"{len(layers)} layers but {len(weights)} weight and {len(biases)} bias arrays"
            )
        self.input_dim = input_dim
        self.layers: Tuple[LayerSpec, ...] = tuple(layers)
        self.l2_lambda = float(l2_lambda)
        self.weights: List[np.ndarray] = [np.array(w, dtype=np.float64) for w in weights]
        self.biases: List[np.ndarray] = [np.array(b, dtype=np.float64) for b in biases]

        fan_in = input_dim
        for index, (spec, w, b) in enumerate(zip(self.layers, self.weights, self.biases)):
            if w.shape != (spec.size, fan_in) or b.shape != (spec.size,):
                raise ShapeError(
                    f"layer {index}: expected weights {(spec.size, fan_in)} and bias {(spec.size,)}, "
                    f"got {w.shape} and {b.shape}"
                )
            if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
                raise ShapeError(f"layer {index} has non-finite parameters")
            fan_in = spec.size
        self._version = 0

    @classmethod
    def init(
        cls,
        input_dim: int,
        layers: Sequence[LayerSpec],
        l2_lambda: float = 1e-4,
        seed: int = 0,
    ) -> "Mlp":
        """Glorot-uniform weights and zero biases, deterministic in `seed`."""
        _check_layers(input_dim, layers)
        rng = np.random.default_rng(seed)
        weights, biases = [], []
        fan_in = input_dim
        for spec in layers:
            limit = np.sqrt(6.0 / (fan_in + spec.size))
            weights.append(rng.uniform(-limit, limit, size=(spec.size, fan_in)))
            biases.append(np.zeros(spec.size))
            fan_in = spec.size
        return cls(input_dim, layers, weights, biases, l2_lambda)

    def copy(self) -> "Mlp":
        return Mlp(self.input_dim, self.layers, self.weights, self.biases, self.l2_lambda)

    def __repr__(self) -> str:
        sizes = [spec.size for spec in self.layers]
        return f"Mlp(input_dim={self.input_dim}, layers={sizes}, l2_lambda={self.l2_lambda})"

    def weight_norm_sq(self) -> float:
        """Sum of squared Frobenius norms of the weight matrices."""
        return float(sum(np.sum(w * w) for w in self.weights))

    def forward(
        self,
        x: np.ndarray,
        mode: ForwardMode = ForwardMode.EVAL,
        rng: Optional[np.random.Generator] = None,
    ) -> Tuple[Union[float, np.ndarray], ForwardCache]:
        """Propagate one row (1-D) or a batch (2-D) through the network.

        Returns the output probability (a float for a single row, a vector for
        a batch) and the cache needed by `backward`.
        """
        x = np.asarray(x, dtype=np.float64)
        single = x.ndim == 1
        if single:
            x = x[np.newaxis, :]
        self._check_features(x)
        if mode is ForwardMode.TRAIN and rng is None:
            raise ValueError("train-mode forward needs a random generator for dropout masks")

        cache = ForwardCache(model_id=id(self), model_version=self._version, mode=mode)
        a = x
        for spec, w, b in zip(self.layers, self.weights, self.biases):
            cache.inputs.append(a)
            s = a @ w.T + b
            h = sigmoid(s) if spec.activation is Activation.SIGMOID else relu(s)
            mask = None
            if mode is ForwardMode.TRAIN and spec.dropout_rate > 0.0:
                keep = rng.random(h.shape) >= spec.dropout_rate
                mask = keep / (1.0 - spec.dropout_rate)
                a = h * mask
            else:
                a = h
            cache.pre_activations.append(s)
            cache.activations.append(h)
            cache.masks.append(mask)
            cache.outputs.append(a)

        probabilities = a[:, 0]
        if single:
            return float(probabilities[0]), cache
        return probabilities, cache

    def loss(self, probabilities: np.ndarray, labels: np.ndarray) -> float:
        """Mean binary cross-entropy plus (lambda / 2m) * sum ||W||^2."""
        p = np.atleast_1d(np.asarray(probabilities, dtype=np.float64))
        y = np.atleast_1d(np.asarray(labels, dtype=np.float64))
        if p.size == 0:
            raise ShapeError("loss of an empty batch")
        if p.shape != y.shape:
            raise ShapeError(f"{p.shape[0]} probabilities but {y.shape[0]} labels")
        p = np.clip(p, PROBABILITY_CLAMP, 1.0 - PROBABILITY_CLAMP)
        cross_entropy = -np.mean(y * np.log(p) + (1.0 - y) * np.log(1.0 - p))
        penalty = 0.5 * self.l2_lambda * self.weight_norm_sq() / p.size
        return float(cross_entropy + penalty)

    def backward(self, cache: Optional[ForwardCache], labels: np.ndarray) -> Gradients:
        """Exact gradients of `loss` for the batch that produced `cache`."""
        if cache is None:
            raise StaleCacheError("backward called without a forward cache")
        if cache.model_id != id(self) or cache.model_version != self._version:
            raise StaleCacheError("forward cache does not match the current parameters")
        if cache.mode is not ForwardMode.TRAIN:
            raise StaleCacheError("backward needs a train-mode forward cache")
        y = np.atleast_1d(np.asarray(labels, dtype=np.float64))
        m = cache.batch_size
        if y.shape != (m,):
            raise ShapeError(f"{y.shape[0]} labels for a batch of {m}")

        p = cache.outputs[-1][:, 0]
        # sigmoid output with cross-entropy: dL/dS = (p - y) / m
        delta = ((p - y) / m)[:, np.newaxis]
        grad_w: List[np.ndarray] = [None] * len(self.layers)
        grad_b: List[np.ndarray] = [None] * len(self.layers)
        for index in range(len(self.layers) - 1, -1, -1):
            w = self.weights[index]
            grad_w[index] = delta.T @ cache.inputs[index] + (self.l2_lambda / m) * w
            grad_b[index] = delta.sum(axis=0)
            if index == 0:
                break
            upstream = delta @ w
            below = index - 1
            if cache.masks[below] is not None:
                upstream = upstream * cache.masks[below]
            h = cache.activations[below]
            if self.layers[below].activation is Activation.SIGMOID:
                delta = upstream * h * (1.0 - h)
            else:
                delta = upstream * (cache.pre_activations[below] > 0.0)
        return Gradients(weights=grad_w, biases=grad_b)

    def apply_gradients(self, gradients: Gradients, learning_rate: float) -> None:
        """Plain SGD step w <- w - lr * g; invalidates earlier caches."""
        for w, g in zip(self.weights, gradients.weights):
            w -= learning_rate * g
        for b, g in zip(self.biases, gradients.biases):
            b -= learning_rate * g
        self._version += 1

    def predict_proba(self, features: np.ndarray) -> np.ndarray:
        """Eval-mode churn probability for every row."""
        features = np.asarray(features, dtype=np.float64)
        if features.ndim != 2:
            raise ShapeError(f"features must be 2-D, got shape {features.shape}")
        probabilities, _ = self.forward(features, ForwardMode.EVAL)
        return probabilities

    def predict_label(self, features: np.ndarray, threshold: float = 0.5) -> np.ndarray:
        """1 where the probability is at or above `threshold`, else 0."""
        if not 0.0 < threshold < 1.0:
            raise ValueError(f"threshold must lie in (0, 1), got {threshold}")
        return (self.predict_proba(features) >= threshold).astype(np.int64)

    def to_state(self) -> MlpState:
        return MlpState(
            input_dim=self.input_dim,
            layers=list(self.layers),
            l2_lambda=self.l2_lambda,
            weights=[w.tolist() for w in self.weights],
            biases=[b.tolist() for b in self.biases],
        )

    @classmethod
    def from_state(cls, state: MlpState) -> "Mlp":
        return cls(
            state.input_dim,
            state.layers,
            [np.array(w, dtype=np.float64) for w in state.weights],
            [np.array(b, dtype=np.float64) for b in state.biases],
            state.l2_lambda,
        )

    def _check_features(self, x: np.ndarray) -> None:
        if x.ndim != 2 or x.shape[1] != self.input_dim:
            raise ShapeError(f"expected {self.input_dim} features per row, got shape {x.shape}")
        if not np.all(np.isfinite(x)):
            raise ShapeError("input contains non-finite values")


def _check_layers(input_dim: int, layers: Sequence[LayerSpec]) -> None:
    if input_dim < 1:
        raise ShapeError(f"input_dim must be >= 1, got {input_dim}")
    if not layers:
        raise ShapeError("an Mlp needs at least the output layer")
    for index, spec in enumerate(layers):
        if spec.size < 1:
            raise ShapeError(f"layer {index} has size {spec.size}")
    output = layers[-1]
    if output.size != 1:
        raise ShapeError(f"final layer must have size 1, got {output.size}")
    if output.activation is not Activation.SIGMOID or output.dropout_rate != 0.0:
        raise ShapeError("final layer must be sigmoid without dropout")


def _loss_and_accuracy(model: Mlp, dataset: NumericDataset, threshold: float) -> Tuple[float, float]:
    probabilities = model.predict_proba(dataset.features)
    accuracy = float(np.mean((probabilities >= threshold) == (dataset.labels == 1)))
    return model.loss(probabilities, dataset.labels), accuracy


def train(
    model: Mlp,
    train: NumericDataset,
    validation: NumericDataset,
    config: TrainConfig,
) -> Tuple[Mlp, TrainHistory]:
    """Mini-batch SGD on a copy of `model`; deterministic in (seed, data, config).

    After every epoch the eval-mode loss and accuracy on both sets are
    recorded. A non-finite loss aborts with DivergenceError naming the epoch.
    """
    for name, dataset in (("train", train), ("validation", validation)):
        if dataset.n_rows == 0:
            raise ShapeError(f"{name} set is empty")
        if dataset.n_features != model.input_dim:
            raise ShapeError(
                f"{name} set has {dataset.n_features} features, model expects {model.input_dim}"
            )

    model = model.copy()
    rng = np.random.default_rng(config.seed)
    history = TrainHistory()
    n = train.n_rows
    logger.info(
        "Training %r on %d rows for %d epochs (batch %d, lr %g)",
        model, n, config.epochs, config.batch_size, config.learning_rate,
    )

    with np.errstate(over="ignore", invalid="ignore"):
        for epoch in range(1, config.epochs + 1):
            order = rng.permutation(n) if config.shuffle_each_epoch else np.arange(n)
            for start in range(0, n, config.batch_size):
                batch = order[start:start + config.batch_size]
                _, cache = model.forward(train.features[batch], ForwardMode.TRAIN, rng)
                gradients = model.backward(cache, train.labels[batch])
                model.apply_gradients(gradients, config.learning_rate)

            train_loss, train_accuracy = _loss_and_accuracy(model, train, config.classification_threshold)
            validation_loss, validation_accuracy = _loss_and_accuracy(
                model, validation, config.classification_threshold
            )
            if not (np.isfinite(train_loss) and np.isfinite(validation_loss)):
                raise DivergenceError(epoch)
            history.record(train_loss, train_accuracy, validation_loss, validation_accuracy)
            logger.debug(
                "epoch %d: train_loss=%.6f train_acc=%.4f val_loss=%.6f val_acc=%.4f",
                epoch, train_loss, train_accuracy, validation_loss, validation_accuracy,
            )

    logger.info(
        "Finished training: train_loss=%.6f val_loss=%.6f val_acc=%.4f",
        history.train_loss[-1], history.validation_loss[-1], history.validation_accuracy[-1],
    )
    return model, history
