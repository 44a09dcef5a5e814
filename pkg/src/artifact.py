"""Versioned JSON model artifacts: preprocessing plan, network and run configuration."""

import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Union

import numpy as np
from pydantic import BaseModel, Field, ValidationError

from src import __version__
from src.exceptions import ArtifactError, UnsupportedVersionError
from src.mlp import MODEL_FORMAT_VERSION, Mlp, MlpState
from src.models import ExperimentConfig
from src.preprocess import PLAN_FORMAT_VERSION, PreprocessPlan

logger = logging.getLogger(__name__)

ARTIFACT_FORMAT_VERSION = 1


class Fingerprint(BaseModel):
    """A stored input row and the probability the model gave it."""
    features: List[float]
    probability: float


class ModelArtifact(BaseModel):
    """Everything needed to reproduce a trained model's predictions."""
    format_version: int = ARTIFACT_FORMAT_VERSION
    package_version: str = Field(default=__version__)
    plan: PreprocessPlan
    model: MlpState
    config: ExperimentConfig
    fingerprint: Fingerprint

    @classmethod
    def create(
        cls,
        plan: PreprocessPlan,
        model: Mlp,
        config: ExperimentConfig,
        reference_row: np.ndarray,
    ) -> "ModelArtifact":
        """Bundle a trained model, fingerprinting it on `reference_row`."""
        row = np.asarray(reference_row, dtype=np.float64).reshape(1, -1)
        probability = float(model.predict_proba(row)[0])
        return cls(
            plan=plan,
            model=model.to_state(),
            config=config,
            fingerprint=Fingerprint(features=row[0].tolist(), probability=probability),
        )

    def build_model(self) -> Mlp:
        return Mlp.from_state(self.model)

    def to_json(self) -> str:
        return json.dumps(self.model_dump(mode="json"), sort_keys=True, indent=2) + "\n"


def save_artifact(artifact: ModelArtifact, path: Union[str, Path]) -> Path:
    """Write the artifact as sorted-key JSON with round-trip floats."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(artifact.to_json(), encoding="utf-8")
    logger.info("Saved model artifact to %s", path)
    return path


def _section(data: Dict[str, Any], name: str, path: Path) -> Dict[str, Any]:
    section = data.get(name)
    if not isinstance(section, dict):
        raise ArtifactError(f"artifact {path} has no \"{name}\" object")
    return section


def _check_version(found: object, supported: int) -> None:
    if found != supported:
        raise UnsupportedVersionError(found, supported)


def load_artifact(path: Union[str, Path]) -> ModelArtifact:
    """Read and verify an artifact.

    Raises ArtifactError when the file cannot be parsed or the stored
    fingerprint row no longer reproduces its probability bit-exactly, and
    UnsupportedVersionError for unknown format versions.
    """
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except OSError as e:
        raise ArtifactError(f"cannot read artifact {path}: {e}") from e
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise ArtifactError(f"cannot parse artifact {path}: {e}") from e
    if not isinstance(data, dict):
        raise ArtifactError(f"artifact {path} is not a JSON object")

    _check_version(data.get("format_version"), ARTIFACT_FORMAT_VERSION)
    _check_version(_section(data, "plan", path).get("format_version"), PLAN_FORMAT_VERSION)
    _check_version(_section(data, "model", path).get("format_version"), MODEL_FORMAT_VERSION)

    try:
        artifact = ModelArtifact.model_validate(data)
        model = artifact.build_model()
    except (ValidationError, ValueError) as e:
        raise ArtifactError(f"invalid artifact {path}: {e}") from e

    row = np.array([artifact.fingerprint.features], dtype=np.float64)
    probability = float(model.predict_proba(row)[0])
    if probability != artifact.fingerprint.probability:
        raise ArtifactError(
            f"artifact {path} fingerprint mismatch: stored {artifact.fingerprint.probability!r}, "
            f"recomputed {probability!r}"
        )
    return artifact
