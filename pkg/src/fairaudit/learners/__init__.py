"""Native baseline classifiers behind one fit/predict interface.

All learners accept per-row sample weights and emit scores in [0, 1];
training is deterministic for a fixed seed. Models serialize to a
versioned JSON document.
"""

from __future__ import annotations

import numpy as np

from ..dataset import DataTable
from ..errors import SchemaError
from .base import Classifier, LearnerConfig, select_features, training_arrays
from .logistic import LogisticModel, fit_logistic
from .mlp import MLPModel, fit_mlp
from .trees import ForestModel, TreeModel, fit_forest, fit_tree, tree_from_params

KINDS = ("logistic", "tree", "forest", "mlp")

_FITTERS = {
    "logistic": fit_logistic,
    "tree": fit_tree,
    "forest": fit_forest,
    "mlp": fit_mlp,
}


def fit(
    kind: str,
    table: DataTable,
    weights: np.ndarray | None = None,
    config: LearnerConfig | None = None,
) -> Classifier:
    if kind not in _FITTERS:
        raise SchemaError(f"unknown learner kind {kind!r}; expected one of {KINDS}")
    config = config or LearnerConfig()
    X, y, w, names = training_arrays(table, weights)
    return _FITTERS[kind](X, y, w, names, config)


def predict_scores(model: Classifier, table: DataTable) -> np.ndarray:
    X = select_features(model, table)
    return model.score_matrix(X)


def predict_labels(model: Classifier, table: DataTable, threshold: float = 0.5) -> np.ndarray:
    if not 0.0 <= threshold <= 1.0:
        raise ValueError(f"threshold must be in [0,1], got {threshold}")
    scores = predict_scores(model, table)
    return (scores >= threshold).astype(float)


def model_to_dict(model: Classifier) -> dict:
    return model.to_dict()


def model_from_dict(doc: dict) -> Classifier:
    if doc.get("version") != 1:
        raise SchemaError(f"unsupported model document version {doc.get('version')!r}")
    config = LearnerConfig(**doc["config"])
    names = doc["features"]
    kind = doc["kind"]
    p = doc["params"]
    if kind == "logistic":
        return LogisticModel(names, config, p["coef"], p["bias"], p["mu"], p["sigma"])
    if kind == "mlp":
        return MLPModel(names, config, p["params"], p["mu"], p["sigma"], p["hidden"])
    if kind == "tree":
        return TreeModel(names, config, tree_from_params(p))
    if kind == "forest":
        return ForestModel(names, config, [tree_from_params(tp) for tp in p["trees"]])
    raise SchemaError(f"unknown model kind {kind!r}")


__all__ = [
    "KINDS",
    "Classifier",
    "LearnerConfig",
    "LogisticModel",
    "MLPModel",
    "TreeModel",
    "ForestModel",
    "fit",
    "predict_scores",
    "predict_labels",
    "model_to_dict",
    "model_from_dict",
]
