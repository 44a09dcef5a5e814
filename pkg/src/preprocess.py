"""Cleaning, label encoding and feature scaling fitted on training rows, plus data splitting."""

import logging
import math
from dataclasses import dataclass
from typing import Dict, Iterable, List, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.exceptions import PlanError, SchemaError, ShapeError, SplitError, UnknownColumnError
from src.models import ScalerKind, SplitSpec
from src.tabular import ColumnKind, Frame, column_stats, null_fraction

logger = logging.getLogger(__name__)

PLAN_FORMAT_VERSION = 1

# Scale denominators below this are treated as 1.0.
SCALE_EPSILON = 1e-12

# Floor slack for fraction * n products such as 0.29 * 100.
FLOOR_SLACK = 1e-9


class PreprocessPlan(BaseModel):
    """Fitted, serializable transformer from a Frame to a NumericDataset."""
    model_config = ConfigDict(frozen=True)

    format_version: int = PLAN_FORMAT_VERSION
    target_column: str
    target_positive_value: str
    target_kind: ColumnKind
    id_columns: List[str] = Field(default_factory=list)
    drop_threshold: float
    feature_names: List[str] = Field(..., description="Retained feature columns, in frame order")
    feature_kinds: Dict[str, ColumnKind]
    dropped_columns: List[str] = Field(default_factory=list)
    impute_values: Dict[str, Union[float, str]]
    label_maps: Dict[str, Dict[str, int]] = Field(default_factory=dict)
    scaler: Dict[str, Tuple[float, float]] = Field(default_factory=dict)
    scaler_kind: ScalerKind = ScalerKind.ZSCORE

    @model_validator(mode="after")
    def features_partitioned(self) -> "PreprocessPlan":
        for name in self.feature_names:
            homes = [name in self.label_maps, name in self.scaler]
            if sum(homes) != 1:
                raise ValueError(f"feature '{name}' must be either label-encoded or scaled")
            if name not in self.impute_values:
                raise ValueError(f"feature '{name}' has no impute value")
        overlap = set(self.dropped_columns) & (set(self.label_maps) | set(self.scaler))
        if overlap:
            raise ValueError(f"dropped columns also carry encodings: {sorted(overlap)}")
        for name, codes in self.label_maps.items():
            if sorted(codes.values()) != list(range(len(codes))):
                raise ValueError(f"label map for '{name}' is not contiguous from 0")
        return self

    def kind_overrides(self) -> Dict[str, ColumnKind]:
        """Column kinds to force when loading data this plan will be applied to."""
        kinds = dict(self.feature_kinds)
        kinds[self.target_column] = self.target_kind
        return kinds


@dataclass(frozen=True)
class NumericDataset:
    """Fully numeric feature matrix with 0/1 labels."""
    features: np.ndarray
    labels: np.ndarray
    feature_names: Tuple[str, ...]

    def __post_init__(self):
        if self.features.ndim != 2:
            raise ShapeError(f"features must be 2-D, got shape {self.features.shape}")
        if self.labels.ndim != 1 or self.labels.shape[0] != self.features.shape[0]:
            raise ShapeError(
                f"labels shape {self.labels.shape} does not match {self.features.shape[0]} rows"
            )
        if self.features.shape[1] != len(self.feature_names):
            raise ShapeError(
                f"{self.features.shape[1]} feature columns but {len(self.feature_names)} names"
            )
        if not np.all(np.isfinite(self.features)):
            raise ShapeError("features contain non-finite values")
        if not np.all((self.labels == 0) | (self.labels == 1)):
            raise ShapeError("labels must be 0 or 1")

    @property
    def n_rows(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def take(self, indices: np.ndarray) -> "NumericDataset":
        return NumericDataset(self.features[indices], self.labels[indices], self.feature_names)


def target_labels(frame: Frame, target_column: str, positive_value: str) -> np.ndarray:
    """0/1 vector marking rows whose target equals `positive_value`."""
    if target_column not in frame:
        raise SchemaError(f"target column '{target_column}' not found", column=target_column)
    cells = frame.column(target_column)
    missing = sum(1 for cell in cells if cell is None)
    if missing:
        raise PlanError(f"target column '{target_column}' has {missing} missing cells")

    if frame.kind(target_column) is ColumnKind.NUMERIC:
        try:
            positive = float(positive_value)
        except ValueError:
            raise PlanError(
                f"numeric target '{target_column}' cannot match positive value '{positive_value}'"
            ) from None
        return np.array([1 if cell == positive else 0 for cell in cells], dtype=np.int64)
    return np.array([1 if cell == positive_value else 0 for cell in cells], dtype=np.int64)


def fit_plan(
    frame: Frame,
    target_column: str,
    target_positive_value: str,
    id_columns: Iterable[str] = (),
    drop_threshold: float = 0.30,
    scaler_kind: ScalerKind = ScalerKind.ZSCORE,
) -> PreprocessPlan:
    """Fit imputation, label encoding and scaling on `frame`.

    Columns whose null fraction is at or above `drop_threshold` are dropped,
    as are all-missing columns. Scaling parameters are computed on the
    imputed values.
    """
    ids = list(id_columns)
    for name in ids:
        if name not in frame:
            raise UnknownColumnError(name)
    labels = target_labels(frame, target_column, target_positive_value)
    target_kind = frame.kind(target_column)
    if target_kind is ColumnKind.NUMERIC:
        distinct = set(frame.column(target_column))
        if len(distinct) > 2:
            raise PlanError(
                f"numeric target '{target_column}' must be binary, found {len(distinct)} distinct values"
            )
    if labels.sum() == 0:
        logger.warning("No rows carry the positive target value '%s'", target_positive_value)

    excluded = {target_column, *ids}
    feature_names: List[str] = []
    feature_kinds: Dict[str, ColumnKind] = {}
    dropped: List[str] = []
    impute_values: Dict[str, Union[float, str]] = {}
    label_maps: Dict[str, Dict[str, int]] = {}
    scaler: Dict[str, Tuple[float, float]] = {}

    for name, kind in zip(frame.column_names, frame.kinds):
        if name in excluded:
            continue
        fraction = null_fraction(frame, name)
        if fraction == 1.0:
            logger.warning("Column '%s' is entirely missing; dropping it", name)
            dropped.append(name)
            continue
        if fraction >= drop_threshold:
            logger.info("Dropping column '%s' (null fraction %.4f >= %.2f)", name, fraction, drop_threshold)
            dropped.append(name)
            continue

        fill = column_stats(frame, name)
        impute_values[name] = fill
        feature_names.append(name)
        feature_kinds[name] = kind
        cells = frame.column(name)

        if kind is ColumnKind.CATEGORICAL:
            values = sorted({cell for cell in cells if cell is not None})
            label_maps[name] = {value: code for code, value in enumerate(values)}
        else:
            imputed = np.array([fill if cell is None else cell for cell in cells], dtype=np.float64)
            if scaler_kind is ScalerKind.ZSCORE:
                scaler[name] = (float(np.mean(imputed)), float(np.std(imputed)))
            else:
                scaler[name] = (float(np.min(imputed)), float(np.max(imputed)))

    if not feature_names:
        raise PlanError("every feature column was dropped; nothing left to train on")

    logger.info(
        "Fitted plan: %d features (%d categorical, %d numeric), %d dropped",
        len(feature_names), len(label_maps), len(scaler), len(dropped),
    )
    return PreprocessPlan(
        target_column=target_column,
        target_positive_value=target_positive_value,
        target_kind=target_kind,
        id_columns=ids,
        drop_threshold=drop_threshold,
        feature_names=feature_names,
        feature_kinds=feature_kinds,
        dropped_columns=sorted(dropped),
        impute_values=impute_values,
        label_maps=label_maps,
        scaler=scaler,
        scaler_kind=scaler_kind,
    )


def _scale(values: np.ndarray, params: Tuple[float, float], kind: ScalerKind) -> np.ndarray:
    if kind is ScalerKind.ZSCORE:
        mean, std = params
        denominator = std if std >= SCALE_EPSILON else 1.0
        return (values - mean) / denominator
    low, high = params
    spread = high - low
    denominator = spread if spread >= SCALE_EPSILON else 1.0
    return (values - low) / denominator


def apply_features(plan: PreprocessPlan, frame: Frame) -> np.ndarray:
    """Feature matrix for `frame` under `plan`; the target column is not needed."""
    columns = []
    for name in plan.feature_names:
        if name not in frame:
            raise SchemaError(f"missing required column '{name}'", column=name)
        expected = plan.feature_kinds[name]
        if frame.kind(name) is not expected:
            raise SchemaError(
                f"column '{name}' is {frame.kind(name).value}, plan expects {expected.value}",
                column=name,
            )
        fill = plan.impute_values[name]
        cells = frame.column(name)

        if expected is ColumnKind.CATEGORICAL:
            codes = plan.label_maps[name]
            fallback = codes[fill]
            unseen = sum(1 for cell in cells if cell is not None and cell not in codes)
            if unseen:
                logger.warning("Column '%s': %d cells with unseen categories mapped to '%s'", name, unseen, fill)
            column = np.array(
                [fallback if cell is None else codes.get(cell, fallback) for cell in cells],
                dtype=np.float64,
            )
        else:
            raw = np.array([fill if cell is None else cell for cell in cells], dtype=np.float64)
            column = _scale(raw, plan.scaler[name], plan.scaler_kind)
        columns.append(column)

    if frame.n_rows == 0:
        return np.zeros((0, len(plan.feature_names)), dtype=np.float64)
    return np.column_stack(columns)


def apply_plan(plan: PreprocessPlan, frame: Frame) -> NumericDataset:
    """Impute, encode and scale `frame` into a NumericDataset with labels."""
    features = apply_features(plan, frame)
    if plan.target_column in frame and frame.kind(plan.target_column) is not plan.target_kind:
        raise SchemaError(
            f"target column '{plan.target_column}' is {frame.kind(plan.target_column).value}, "
            f"plan expects {plan.target_kind.value}",
            column=plan.target_column,
        )
    labels = target_labels(frame, plan.target_column, plan.target_positive_value)
    return NumericDataset(features, labels, tuple(plan.feature_names))


def _part_sizes(n: int, spec: SplitSpec) -> Tuple[int, int, int]:
    n_train = math.floor(spec.train_fraction * n + FLOOR_SLACK)
    n_validation = math.floor(spec.validation_fraction * n + FLOOR_SLACK)
    n_test = n - n_train - n_validation
    for part, count in (("train", n_train), ("test", n_test), ("validation", n_validation)):
        if count <= 0:
            raise SplitError(f"{part} part empty: {n} rows are too few for this split")
    return n_train, n_test, n_validation


def _allocate(total: int, fraction: float, sizes: np.ndarray, capacity: np.ndarray) -> np.ndarray:
    """Per-class quotas summing to `total`: floors first, then largest remainders."""
    exact = fraction * sizes
    quota = np.minimum(np.floor(exact + FLOOR_SLACK).astype(np.int64), capacity)
    order = np.lexsort((np.arange(len(sizes)), -(exact - quota)))
    while quota.sum() < total:
        for k in order:
            if quota.sum() == total:
                break
            if quota[k] < capacity[k]:
                quota[k] += 1
    return quota


def split_indices(labels: np.ndarray, spec: SplitSpec) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Disjoint (train, test, validation) row indices covering all rows."""
    labels = np.asarray(labels)
    n = labels.shape[0]
    if n < 3:
        raise SplitError(f"need at least 3 rows to split, got {n}")
    n_train, n_test, n_validation = _part_sizes(n, spec)
    rng = np.random.default_rng(spec.seed)

    if not spec.stratified:
        order = rng.permutation(n)
        return (
            order[:n_train],
            order[n_train + n_validation:],
            order[n_train:n_train + n_validation],
        )

    classes = np.unique(labels)
    members = [rng.permutation(np.flatnonzero(labels == c)) for c in classes]
    sizes = np.array([len(m) for m in members], dtype=np.int64)
    train_quota = _allocate(n_train, spec.train_fraction, sizes, sizes)
    validation_quota = _allocate(n_validation, spec.validation_fraction, sizes, sizes - train_quota)

    train_parts, test_parts, validation_parts = [], [], []
    for rows, n_tr, n_va in zip(members, train_quota, validation_quota):
        train_parts.append(rows[:n_tr])
        validation_parts.append(rows[n_tr:n_tr + n_va])
        test_parts.append(rows[n_tr + n_va:])
    train = rng.permutation(np.concatenate(train_parts))
    test = rng.permutation(np.concatenate(test_parts))
    validation = rng.permutation(np.concatenate(validation_parts))
    return train, test, validation


def split(dataset: NumericDataset, spec: SplitSpec) -> Tuple[NumericDataset, NumericDataset, NumericDataset]:
    """Shuffle and partition a dataset into (train, test, validation)."""
    train, test, validation = split_indices(dataset.labels, spec)
    logger.info("Split %d rows into train=%d test=%d validation=%d",
                dataset.n_rows, len(train), len(test), len(validation))
    return dataset.take(train), dataset.take(test), dataset.take(validation)
