"""Pytest configuration and fixtures."""

from pathlib import Path

import numpy as np
import pytest

from src.models import Activation, ExperimentConfig, LayerSpec, OUTPUT_LAYER, TrainConfig
from src.preprocess import NumericDataset
from src.synthetic import gen_synthetic
from src.tabular import ColumnKind, Frame


def write_csv(path: Path, text: str) -> Path:
    """Write CSV text exactly as given."""
    path.write_text(text, encoding="utf-8")
    return path


@pytest.fixture
def csv_writer(tmp_path):
    """Write CSV text into tmp_path and return the file path."""
    def _write(text: str, name: str = "data.csv") -> Path:
        return write_csv(tmp_path / name, text)
    return _write


@pytest.fixture
def customer_frame():
    """Small frame with one numeric, two categorical columns and a target."""
    return Frame(
        ["cust_id", "age", "gender", "religion", "churn"],
        [ColumnKind.CATEGORICAL, ColumnKind.NUMERIC, ColumnKind.CATEGORICAL,
         ColumnKind.CATEGORICAL, ColumnKind.CATEGORICAL],
        [
            ("C1", 30.0, "M", "Christian", "No"),
            ("C2", 40.0, "F", "Islam", "Yes"),
            ("C3", None, "M", "Other Religion", "No"),
            ("C4", 50.0, None, "Christian", "No"),
            ("C5", 20.0, "F", "Islam", "Yes"),
        ],
    )


def make_separable(n: int = 200, n_features: int = 4, seed: int = 0) -> NumericDataset:
    rng = np.random.default_rng(seed)
    features = rng.standard_normal((n, n_features))
    labels = (features[:, 0] + features[:, 1] > 0).astype(np.int64)
    names = tuple(f"x{i}" for i in range(n_features))
    return NumericDataset(features, labels, names)


@pytest.fixture
def separable():
    """200-point linearly separable dataset with 4 features."""
    return make_separable()


@pytest.fixture
def separable_validation():
    return make_separable(n=60, seed=1)


@pytest.fixture
def small_layers():
    """One hidden sigmoid layer of 4 units and the output unit."""
    return [LayerSpec(size=4, activation=Activation.SIGMOID), OUTPUT_LAYER]


@pytest.fixture(scope="session")
def synthetic_csv(tmp_path_factory):
    """A 600-row synthetic customer CSV shared across tests."""
    path = tmp_path_factory.mktemp("data") / "customers.csv"
    gen_synthetic(600, churn_rate=0.1, null_rate=0.05, seed=11, path=path)
    return path


@pytest.fixture
def tiny_config(synthetic_csv, tmp_path):
    """Fast experiment config over the shared synthetic CSV."""
    return ExperimentConfig(
        data_path=synthetic_csv,
        hidden_layers=[LayerSpec(size=6, activation=Activation.SIGMOID, dropout_rate=0.1)],
        train=TrainConfig(epochs=5, batch_size=32, learning_rate=0.1, seed=3),
        output_dir=tmp_path / "run",
    )
