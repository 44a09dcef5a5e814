"""Unit tests for Pydantic models."""

import pytest
from pydantic import ValidationError

from src.models import (
    OUTPUT_LAYER,
    Activation,
    ConfusionMatrix,
    ExperimentConfig,
    LayerSpec,
    LeaderboardEntry,
    SelectionMetric,
    SweepSpec,
    TrainConfig,
    TrainHistory,
    mix_seed,
)


class TestLayerSpec:
    """Tests for LayerSpec model."""

    def test_defaults(self):
        """Test LayerSpec defaults."""
        spec = LayerSpec(size=3)
        assert spec.activation is Activation.SIGMOID
        assert spec.dropout_rate == 0.0

    def test_invalid_values(self):
        """Test that a zero size or a dropout rate of 1 is rejected."""
        with pytest.raises(ValidationError):
            LayerSpec(size=0)
        with pytest.raises(ValidationError):
            LayerSpec(size=2, dropout_rate=1.0)

    def test_output_layer(self):
        """Test the fixed output layer."""
        assert OUTPUT_LAYER.size == 1
        assert OUTPUT_LAYER.activation is Activation.SIGMOID


class TestTrainConfig:
    """Tests for TrainConfig model."""

    def test_defaults(self):
        """Test TrainConfig defaults."""
        config = TrainConfig()
        assert config.batch_size == 32
        assert config.learning_rate == 0.01
        assert config.shuffle_each_epoch is True
        assert config.classification_threshold == 0.5

    @pytest.mark.parametrize("field,value", [
        ("epochs", 0),
        ("batch_size", 0),
        ("learning_rate", 0.0),
        ("classification_threshold", 1.0),
        ("seed", -1),
    ])
    def test_invalid_values(self, field, value):
        """Test that out-of-range training settings are rejected."""
        with pytest.raises(ValidationError):
            TrainConfig(**{field: value})


class TestExperimentConfig:
    """Tests for ExperimentConfig model."""

    def test_minimal(self):
        """Test an ExperimentConfig built from a data path only."""
        config = ExperimentConfig(data_path="data.csv")
        assert config.target_column == "churn"
        assert config.drop_threshold == 0.30
        assert [layer.size for layer in config.layer_specs()] == [16, 8, 1]

    def test_columns_must_be_distinct(self):
        """Test that target and id columns must be distinct."""
        with pytest.raises(ValidationError):
            ExperimentConfig(data_path="data.csv", id_columns=["churn"])

    def test_with_seed(self):
        """Test that with_seed sets the init, split and training seeds."""
        config = ExperimentConfig(data_path="data.csv").with_seed(5)
        assert (config.seed, config.split.seed, config.train.seed) == (5, 5, 5)

    def test_json_round_trip(self):
        """Test that configs survive a JSON round trip."""
        config = ExperimentConfig(data_path="data.csv", l2_lambda=0.01)
        assert ExperimentConfig.model_validate_json(config.model_dump_json()) == config


class TestSweepSpec:
    """Tests for SweepSpec model."""

    def test_enumeration_order(self):
        """Test that candidates enumerate the grid in lexicographic order."""
        spec = SweepSpec(architectures=[[4], [8, 4]], learning_rates=[0.1, 0.01])
        candidates = list(spec.candidates(default_epochs=10))
        assert [(c.hidden_sizes, c.learning_rate) for c in candidates] == [
            ((4,), 0.1), ((4,), 0.01), ((8, 4), 0.1), ((8, 4), 0.01),
        ]
        assert all(c.epochs == 10 for c in candidates)
        assert [c.index for c in candidates] == [0, 1, 2, 3]

    def test_max_models(self):
        """Test that max_models caps the enumeration."""
        spec = SweepSpec(dropout_rates=[0.0, 0.1, 0.2], l2_lambdas=[0.0, 1e-3], max_models=4)
        assert spec.grid_size(5) == 6
        assert len(list(spec.candidates(5))) == 4

    def test_seeds_are_mixed(self):
        """Test that each candidate gets its own mixed seed."""
        spec = SweepSpec(learning_rates=[0.1, 0.2], seed=3)
        first, second = spec.candidates(1)
        assert first.seed != second.seed
        assert first.seed == mix_seed(3, 0)

    def test_empty_axis_rejected(self):
        """Test that empty or invalid grid axes are rejected."""
        with pytest.raises(ValidationError):
            SweepSpec(architectures=[])
        with pytest.raises(ValidationError):
            SweepSpec(learning_rates=[0.0])


class TestTrainHistory:
    """Tests for TrainHistory model."""

    def test_record(self):
        """Test that record appends one epoch."""
        history = TrainHistory()
        history.record(0.5, 0.8, 0.6, 0.7)
        assert history.epochs == 1

    def test_unequal_lengths(self):
        """Test that history lists must have equal lengths."""
        with pytest.raises(ValidationError):
            TrainHistory(train_loss=[0.1], train_accuracy=[], validation_loss=[], validation_accuracy=[])


class TestReports:
    """Tests for metric and leaderboard models."""

    def test_confusion_counts_non_negative(self):
        """Test that confusion counts cannot be negative."""
        with pytest.raises(ValidationError):
            ConfusionMatrix(tp=-1, fp=0, fn=0, tn=0)

    def test_leaderboard_score(self):
        """Test that a leaderboard entry scores by the chosen metric."""
        entry = LeaderboardEntry(index=0, hidden_sizes=(4,), dropout_rate=0.0, l2_lambda=0.0,
                                 learning_rate=0.1, epochs=1, seed=1,
                                 validation_auc=0.9, validation_accuracy=0.8)
        assert entry.score(SelectionMetric.VALIDATION_AUC) == 0.9
        assert entry.score(SelectionMetric.VALIDATION_ACCURACY) == 0.8
