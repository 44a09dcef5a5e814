"""End-to-end orchestration: train, sweep, evaluate and predict."""

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel

from src.artifact import ModelArtifact, load_artifact, save_artifact
from src.exceptions import DivergenceError, SchemaError, SweepError, UndefinedRocError
from src.metrics import check_threshold, evaluate_scores, roc_curve
from src.mlp import Mlp, train
from src.models import (
    OUTPUT_LAYER,
    EvaluationSummary,
    ExperimentConfig,
    LayerSpec,
    LeaderboardEntry,
    RocCurve,
    SweepCandidate,
    SweepSpec,
    TrainHistory,
)
from src.preprocess import NumericDataset, PreprocessPlan, apply_features, apply_plan, fit_plan, split_indices, target_labels
from src.tabular import Frame, load_csv

logger = logging.getLogger(__name__)

MODEL_FILE = "model.json"
REPORT_FILE = "report.json"
HISTORY_FILE = "history.csv"
ROC_FILE = "roc.csv"
LEADERBOARD_FILE = "leaderboard.csv"
PREDICTIONS_FILE = "predictions.csv"


@dataclass
class PreparedData:
    """Raw split frames, the plan fitted on the training part, and numeric parts."""
    plan: PreprocessPlan
    train_frame: Frame
    test_frame: Frame
    validation_frame: Frame
    train: NumericDataset
    test: NumericDataset
    validation: NumericDataset


@dataclass
class TrainResult:
    artifact: ModelArtifact
    history: TrainHistory
    report: EvaluationSummary


@dataclass
class SweepResult:
    artifact: ModelArtifact
    leaderboard: List[LeaderboardEntry]
    winner: LeaderboardEntry
    history: TrainHistory
    report: EvaluationSummary


def _load_labeled(path: Union[str, Path], config: ExperimentConfig, **load_kwargs) -> Frame:
    frame = load_csv(path, null_tokens=config.null_tokens, **load_kwargs)
    if config.target_column not in frame:
        raise SchemaError(f"target column '{config.target_column}' not found in {path}", config.target_column)
    labeled = frame.drop_missing(config.target_column)
    dropped = frame.n_rows - labeled.n_rows
    if dropped:
        logger.warning("Dropped %d rows with a missing '%s' value", dropped, config.target_column)
    return labeled


def prepare_data(config: ExperimentConfig) -> PreparedData:
    """Load, split the raw rows, fit the plan on the training part and apply it everywhere."""
    frame = _load_labeled(config.data_path, config)
    labels = target_labels(frame, config.target_column, config.target_positive_value)
    train_idx, test_idx, validation_idx = split_indices(labels, config.split)
    logger.info(
        "Split %d rows into train=%d test=%d validation=%d",
        frame.n_rows, len(train_idx), len(test_idx), len(validation_idx),
    )
    train_frame = frame.take(train_idx)
    test_frame = frame.take(test_idx)
    validation_frame = frame.take(validation_idx)

    plan = fit_plan(
        train_frame,
        target_column=config.target_column,
        target_positive_value=config.target_positive_value,
        id_columns=config.id_columns,
        drop_threshold=config.drop_threshold,
        scaler_kind=config.scaler_kind,
    )
    return PreparedData(
        plan=plan,
        train_frame=train_frame,
        test_frame=test_frame,
        validation_frame=validation_frame,
        train=apply_plan(plan, train_frame),
        test=apply_plan(plan, test_frame),
        validation=apply_plan(plan, validation_frame),
    )


def write_json(model: BaseModel, path: Path) -> Path:
    path.write_text(json.dumps(model.model_dump(mode="json"), sort_keys=True, indent=2) + "\n", encoding="utf-8")
    return path


def write_history(history: TrainHistory, path: Path) -> Path:
    pd.DataFrame({
        "epoch": list(range(1, history.epochs + 1)),
        "train_loss": history.train_loss,
        "train_acc": history.train_accuracy,
        "val_loss": history.validation_loss,
        "val_acc": history.validation_accuracy,
    }).to_csv(path, index=False, lineterminator="\n")
    return path


def write_roc(roc: RocCurve, path: Path) -> Path:
    pd.DataFrame(roc.points, columns=["fpr", "tpr"]).to_csv(path, index=False, lineterminator="\n")
    return path


def write_leaderboard(entries: List[LeaderboardEntry], path: Path) -> Path:
    rows = []
    for entry in entries:
        row = entry.model_dump()
        row["hidden_sizes"] = "-".join(str(size) for size in entry.hidden_sizes)
        rows.append(row)
    pd.DataFrame(rows, columns=list(LeaderboardEntry.model_fields)).to_csv(
        path, index=False, lineterminator="\n"
    )
    return path


def _write_run(
    out_dir: Path,
    artifact: ModelArtifact,
    history: TrainHistory,
    report: EvaluationSummary,
) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    save_artifact(artifact, out_dir / MODEL_FILE)
    write_json(report, out_dir / REPORT_FILE)
    write_history(history, out_dir / HISTORY_FILE)
    write_roc(report.churn_positive.roc, out_dir / ROC_FILE)
    logger.info("Wrote %s, %s, %s and %s to %s", MODEL_FILE, REPORT_FILE, HISTORY_FILE, ROC_FILE, out_dir)


def _export_splits(data: PreparedData, out_dir: Path) -> None:
    for name, frame in (("train", data.train_frame), ("validation", data.validation_frame), ("test", data.test_frame)):
        frame.to_csv(out_dir / f"{name}.csv")
    logger.info("Exported train/validation/test rows to %s", out_dir)


def _test_report(model: Mlp, data: PreparedData, threshold: float) -> EvaluationSummary:
    return evaluate_scores(model.predict_proba(data.test.features), data.test.labels, threshold)


def run_train(config: ExperimentConfig) -> TrainResult:
    """Train one model and write its artifact, report, history and ROC curve."""
    data = prepare_data(config)
    model = Mlp.init(data.train.n_features, config.layer_specs(), l2_lambda=config.l2_lambda, seed=config.seed)
    trained, history = train(model, data.train, data.validation, config.train)
    report = _test_report(trained, data, config.train.classification_threshold)
    artifact = ModelArtifact.create(data.plan, trained, config, data.test.features[0])

    out_dir = Path(config.output_dir)
    _write_run(out_dir, artifact, history, report)
    if config.export_splits:
        _export_splits(data, out_dir)
    return TrainResult(artifact=artifact, history=history, report=report)


def _candidate_config(config: ExperimentConfig, spec: SweepSpec, candidate: SweepCandidate) -> ExperimentConfig:
    hidden = [
        LayerSpec(size=size, activation=spec.activation, dropout_rate=candidate.dropout_rate)
        for size in candidate.hidden_sizes
    ]
    return config.model_copy(update={
        "hidden_layers": hidden,
        "l2_lambda": candidate.l2_lambda,
        "seed": candidate.seed,
        "train": config.train.model_copy(update={
            "learning_rate": candidate.learning_rate,
            "epochs": candidate.epochs,
            "seed": candidate.seed,
        }),
    })


def _validation_scores(model: Mlp, data: PreparedData, threshold: float):
    probabilities = model.predict_proba(data.validation.features)
    accuracy = float(np.mean((probabilities >= threshold) == (data.validation.labels == 1)))
    try:
        auc: Optional[float] = roc_curve(probabilities, data.validation.labels).auc
    except UndefinedRocError:
        logger.warning("Validation part holds a single class; AUC left empty")
        auc = None
    return auc, accuracy


def sweep(config: ExperimentConfig, spec: SweepSpec) -> SweepResult:
    """Train every grid candidate, keep the best on validation and report it on test.

    The winner maximizes spec.selection_metric; ties go to the lowest
    enumeration index. Diverged runs stay on the leaderboard.
    """
    data = prepare_data(config)
    threshold = config.train.classification_threshold
    leaderboard: List[LeaderboardEntry] = []
    best = None

    for candidate in spec.candidates(config.train.epochs):
        run_config = _candidate_config(config, spec, candidate)
        fields = candidate.model_dump()
        model = Mlp.init(
            data.train.n_features,
            [*run_config.hidden_layers, OUTPUT_LAYER],
            l2_lambda=run_config.l2_lambda,
            seed=run_config.seed,
        )
        try:
            trained, history = train(model, data.train, data.validation, run_config.train)
        except DivergenceError as e:
            logger.warning("Sweep model %d diverged: %s", candidate.index, e)
            leaderboard.append(LeaderboardEntry(**fields, status="diverged"))
            continue

        auc, accuracy = _validation_scores(trained, data, threshold)
        entry = LeaderboardEntry(**fields, validation_auc=auc, validation_accuracy=accuracy)
        leaderboard.append(entry)
        logger.info("Sweep model %d %s: val_auc=%s val_acc=%.4f", candidate.index, candidate.hidden_sizes, auc, accuracy)

        score = entry.score(spec.selection_metric)
        if score is not None and (best is None or score > best[0].score(spec.selection_metric)):
            best = (entry, trained, history, run_config)

    if best is None:
        raise SweepError(f"all {len(leaderboard)} sweep models failed to produce a {spec.selection_metric.value}")

    winner, trained, history, run_config = best
    logger.info("Sweep winner: model %d with %s=%s", winner.index, spec.selection_metric.value, winner.score(spec.selection_metric))
    report = _test_report(trained, data, threshold)
    artifact = ModelArtifact.create(data.plan, trained, run_config, data.test.features[0])

    out_dir = Path(config.output_dir)
    _write_run(out_dir, artifact, history, report)
    write_leaderboard(leaderboard, out_dir / LEADERBOARD_FILE)
    return SweepResult(artifact=artifact, leaderboard=leaderboard, winner=winner, history=history, report=report)


def evaluate(
    artifact_path: Union[str, Path],
    data_path: Union[str, Path],
    threshold: Optional[float] = None,
) -> EvaluationSummary:
    """Score a labeled CSV with a saved model, in both positive-class orientations."""
    if threshold is not None:
        check_threshold(threshold)
    artifact = load_artifact(artifact_path)
    plan = artifact.plan
    frame = _load_labeled(data_path, artifact.config, kind_overrides=plan.kind_overrides())
    dataset = apply_plan(plan, frame)
    model = artifact.build_model()
    if threshold is None:
        threshold = artifact.config.train.classification_threshold
    return evaluate_scores(model.predict_proba(dataset.features), dataset.labels, threshold)


def predict(
    artifact_path: Union[str, Path],
    data_path: Union[str, Path],
    threshold: Optional[float] = None,
    out: Optional[Union[str, Path]] = None,
) -> pd.DataFrame:
    """Churn probabilities and labels for an unlabeled CSV, keyed by the id columns."""
    if threshold is not None:
        check_threshold(threshold)
    artifact = load_artifact(artifact_path)
    plan = artifact.plan
    frame = load_csv(data_path, null_tokens=artifact.config.null_tokens, kind_overrides=plan.kind_overrides())
    model = artifact.build_model()
    if threshold is None:
        threshold = artifact.config.train.classification_threshold
    probabilities = model.predict_proba(apply_features(plan, frame))

    table = {name: list(frame.column(name)) for name in plan.id_columns if name in frame}
    table["churn_probability"] = probabilities
    table["churn_label"] = (probabilities >= threshold).astype(np.int64)
    predictions = pd.DataFrame(table)
    if out is not None:
        out = Path(out)
        out.parent.mkdir(parents=True, exist_ok=True)
        predictions.to_csv(out, index=False, lineterminator="\n")
        logger.info("Wrote %d predictions to %s", len(predictions), out)
    return predictions
