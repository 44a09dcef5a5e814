"""Pydantic models for experiment configuration, training history and reports."""

import itertools
from enum import Enum
from pathlib import Path
from typing import Iterator, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

U64_LIMIT = 2 ** 64


class Activation(str, Enum):
    """Neuron activation function."""
    SIGMOID = "sigmoid"
    RELU = "relu"


class ScalerKind(str, Enum):
    """Numeric feature scaling."""
    ZSCORE = "zscore"
    MINMAX = "minmax"


class SelectionMetric(str, Enum):
    """Validation metric a sweep maximizes."""
    VALIDATION_AUC = "validation_auc"
    VALIDATION_ACCURACY = "validation_accuracy"


class LayerSpec(BaseModel):
    """One fully connected layer."""
    model_config = ConfigDict(frozen=True)

    size: int = Field(..., ge=1, description="Neuron count")
    activation: Activation = Field(Activation.SIGMOID, description="Activation function")
    dropout_rate: float = Field(0.0, ge=0.0, lt=1.0, description="Inverted-dropout rate applied after this layer")


OUTPUT_LAYER = LayerSpec(size=1, activation=Activation.SIGMOID, dropout_rate=0.0)


class TrainConfig(BaseModel):
    """Mini-batch SGD settings."""
    model_config = ConfigDict(frozen=True)

    epochs: int = Field(400, ge=1)
    batch_size: int = Field(32, ge=1)
    learning_rate: float = Field(0.01, gt=0.0)
    seed: int = Field(7, ge=0, lt=U64_LIMIT)
    shuffle_each_epoch: bool = True
    classification_threshold: float = Field(0.5, gt=0.0, lt=1.0)


class SplitSpec(BaseModel):
    """Train/test/validation fractions and the shuffle seed."""
    model_config = ConfigDict(frozen=True)

    train_fraction: float = Field(0.8, gt=0.0, lt=1.0)
    test_fraction: float = Field(0.1, gt=0.0, lt=1.0)
    validation_fraction: float = Field(0.1, gt=0.0, lt=1.0)
    seed: int = Field(7, ge=0, lt=U64_LIMIT)
    stratified: bool = True

    @model_validator(mode="after")
    def fractions_sum_to_one(self) -> "SplitSpec":
        total = self.train_fraction + self.test_fraction + self.validation_fraction
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"split fractions must sum to 1, got {total!r}")
        return self


def _default_hidden_layers() -> List[LayerSpec]:
    return [
        LayerSpec(size=16, activation=Activation.SIGMOID, dropout_rate=0.2),
        LayerSpec(size=8, activation=Activation.SIGMOID, dropout_rate=0.2),
    ]


class ExperimentConfig(BaseModel):
    """Everything one end-to-end training run needs."""
    model_config = ConfigDict(frozen=True)

    data_path: Path = Field(..., description="CSV file with one row per customer")
    target_column: str = Field("churn", min_length=1)
    target_positive_value: str = Field("Yes", description="Target value that marks a churner")
    id_columns: List[str] = Field(default_factory=lambda: ["cust_id"])
    null_tokens: List[str] = Field(default_factory=lambda: ["", "NULL", "null"])
    drop_threshold: float = Field(0.30, gt=0.0, le=1.0, description="Null fraction at or above which a column is dropped")
    scaler_kind: ScalerKind = ScalerKind.ZSCORE
    split: SplitSpec = Field(default_factory=SplitSpec)
    hidden_layers: List[LayerSpec] = Field(default_factory=_default_hidden_layers)
    l2_lambda: float = Field(1e-4, ge=0.0)
    train: TrainConfig = Field(default_factory=TrainConfig)
    seed: int = Field(7, ge=0, lt=U64_LIMIT, description="Weight initialization seed")
    output_dir: Path = Path("runs")
    export_splits: bool = False

    @model_validator(mode="after")
    def columns_distinct(self) -> "ExperimentConfig":
        names = [self.target_column, *self.id_columns]
        if len(set(names)) != len(names):
            raise ValueError(f"target and id columns must be distinct, got {names}")
        return self

    def with_seed(self, seed: int) -> "ExperimentConfig":
        """Copy with the init, split and training seeds all set to `seed`."""
        return self.model_copy(update={
            "seed": seed,
            "split": self.split.model_copy(update={"seed": seed}),
            "train": self.train.model_copy(update={"seed": seed}),
        })

    def layer_specs(self) -> List[LayerSpec]:
        """Hidden layers followed by the single sigmoid output unit."""
        return [*self.hidden_layers, OUTPUT_LAYER]


class SweepCandidate(BaseModel):
    """One point of a sweep grid."""
    index: int
    hidden_sizes: Tuple[int, ...]
    dropout_rate: float
    l2_lambda: float
    learning_rate: float
    epochs: int
    seed: int


class SweepSpec(BaseModel):
    """Grid of architectures and hyperparameters for model search."""
    model_config = ConfigDict(frozen=True)

    architectures: List[List[int]] = Field(default_factory=lambda: [[16, 8]])
    dropout_rates: List[float] = Field(default_factory=lambda: [0.2])
    l2_lambdas: List[float] = Field(default_factory=lambda: [1e-4])
    learning_rates: List[float] = Field(default_factory=lambda: [0.01])
    epochs: Optional[List[int]] = Field(None, description="Epoch counts; None keeps the experiment's")
    activation: Activation = Activation.SIGMOID
    max_models: int = Field(50, ge=1)
    selection_metric: SelectionMetric = SelectionMetric.VALIDATION_AUC
    seed: int = Field(7, ge=0, lt=U64_LIMIT)

    @field_validator("architectures")
    @classmethod
    def check_architectures(cls, value: List[List[int]]) -> List[List[int]]:
        if not value:
            raise ValueError("architectures must not be empty")
        for sizes in value:
            if any(size < 1 for size in sizes):
                raise ValueError(f"layer sizes must be >= 1, got {sizes}")
        return value

    @field_validator("dropout_rates")
    @classmethod
    def check_dropout(cls, value: List[float]) -> List[float]:
        if not value:
            raise ValueError("dropout_rates must not be empty")
        if any(not 0.0 <= p < 1.0 for p in value):
            raise ValueError(f"dropout rates must lie in [0, 1), got {value}")
        return value

    @field_validator("l2_lambdas")
    @classmethod
    def check_l2(cls, value: List[float]) -> List[float]:
        if not value:
            raise ValueError("l2_lambdas must not be empty")
        if any(lam < 0 for lam in value):
            raise ValueError(f"l2 coefficients must be >= 0, got {value}")
        return value

    @field_validator("learning_rates")
    @classmethod
    def check_learning_rates(cls, value: List[float]) -> List[float]:
        if not value:
            raise ValueError("learning_rates must not be empty")
        if any(lr <= 0 for lr in value):
            raise ValueError(f"learning rates must be > 0, got {value}")
        return value

    @field_validator("epochs")
    @classmethod
    def check_epochs(cls, value: Optional[List[int]]) -> Optional[List[int]]:
        if value is not None and (not value or any(e < 1 for e in value)):
            raise ValueError(f"epochs must be a non-empty list of counts >= 1, got {value}")
        return value

    def grid_size(self, default_epochs: int) -> int:
        epochs = self.epochs or [default_epochs]
        return (len(self.architectures) * len(self.dropout_rates) * len(self.l2_lambdas)
                * len(self.learning_rates) * len(epochs))

    def candidates(self, default_epochs: int) -> Iterator[SweepCandidate]:
        """Grid points in lexicographic axis order, at most max_models of them."""
        axes = itertools.product(
            self.architectures,
            self.dropout_rates,
            self.l2_lambdas,
            self.learning_rates,
            self.epochs or [default_epochs],
        )
        for index, (sizes, dropout, lam, lr, epochs) in enumerate(itertools.islice(axes, self.max_models)):
            yield SweepCandidate(
                index=index,
                hidden_sizes=tuple(sizes),
                dropout_rate=dropout,
                l2_lambda=lam,
                learning_rate=lr,
                epochs=epochs,
                seed=mix_seed(self.seed, index),
            )


def mix_seed(seed: int, index: int) -> int:
    """Derive an independent 64-bit seed for grid entry `index`."""
    state = np.random.SeedSequence([seed, index]).generate_state(2, dtype=np.uint32)
    return int(state[0]) << 32 | int(state[1])


class TrainHistory(BaseModel):
    """Per-epoch losses and accuracies on the training and validation sets."""
    train_loss: List[float] = Field(default_factory=list)
    train_accuracy: List[float] = Field(default_factory=list)
    validation_loss: List[float] = Field(default_factory=list)
    validation_accuracy: List[float] = Field(default_factory=list)

    @model_validator(mode="after")
    def equal_lengths(self) -> "TrainHistory":
        lengths = {len(self.train_loss), len(self.train_accuracy),
                   len(self.validation_loss), len(self.validation_accuracy)}
        if len(lengths) > 1:
            raise ValueError("history series must have equal lengths")
        return self

    @property
    def epochs(self) -> int:
        return len(self.train_loss)

    def record(self, train_loss: float, train_accuracy: float,
               validation_loss: float, validation_accuracy: float) -> None:
        self.train_loss.append(train_loss)
        self.train_accuracy.append(train_accuracy)
        self.validation_loss.append(validation_loss)
        self.validation_accuracy.append(validation_accuracy)


class ConfusionMatrix(BaseModel):
    """2x2 counts for one choice of positive class."""
    model_config = ConfigDict(frozen=True)

    tp: int = Field(..., ge=0)
    fp: int = Field(..., ge=0)
    fn: int = Field(..., ge=0)
    tn: int = Field(..., ge=0)
    positive_class: Literal[0, 1] = 1

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


class ScalarMetrics(BaseModel):
    """Accuracy, precision, recall and F-measure with degenerate-denominator flags."""
    accuracy: float = Field(..., ge=0.0, le=1.0)
    precision: float = Field(..., ge=0.0, le=1.0)
    recall: float = Field(..., ge=0.0, le=1.0)
    f_measure: float = Field(..., ge=0.0, le=1.0)
    precision_degenerate: bool = False
    recall_degenerate: bool = False


class RocCurve(BaseModel):
    """ROC points from (0, 0) to (1, 1) and the trapezoidal area under them."""
    points: List[Tuple[float, float]]
    auc: float = Field(..., ge=0.0, le=1.0)


class EvalReport(BaseModel):
    """Metrics for one positive-class orientation."""
    matrix: ConfusionMatrix
    accuracy: float
    precision: float
    recall: float
    f_measure: float
    precision_degenerate: bool = False
    recall_degenerate: bool = False
    roc: RocCurve


class EvaluationSummary(BaseModel):
    """Test-set report with both positive-class orientations."""
    threshold: float
    n_rows: int
    baseline_accuracy: float = Field(..., description="Accuracy of always predicting the majority class")
    churn_positive: EvalReport
    non_churn_positive: EvalReport


class LeaderboardEntry(BaseModel):
    """One trained sweep configuration and its validation scores."""
    index: int
    hidden_sizes: Tuple[int, ...]
    dropout_rate: float
    l2_lambda: float
    learning_rate: float
    epochs: int
    seed: int
    status: Literal["ok", "diverged"] = "ok"
    validation_auc: Optional[float] = None
    validation_accuracy: Optional[float] = None

    def score(self, metric: SelectionMetric) -> Optional[float]:
        if metric is SelectionMetric.VALIDATION_AUC:
            return self.validation_auc
        return self.validation_accuracy
