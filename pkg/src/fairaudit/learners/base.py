"""Shared learner plumbing: config, input checks, standardization."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
from scipy.special import expit

from ..dataset import DataTable
from ..errors import DegenerateTargetError, NumericError, SchemaError


@dataclass(frozen=True)
class LearnerConfig:
    seed: int = 0
    lr: float | None = None  # default: 0.1 logistic, 0.01 mlp
    epochs: int | None = None  # default: 5000 logistic, 1500 mlp
    l2: float = 1e-4
    tol: float = 1e-8  # stop when max |grad| drops below
    hidden: int = 32  # mlp hidden width
    max_depth: int = 8
    n_trees: int = 100
    min_leaf: int = 1
    max_features: str | int = "sqrt"  # per-split feature subsample (forest)

    def to_dict(self) -> dict:
        return asdict(self)


class Classifier:
    """A fitted model over named encoded columns, scoring rows in [0, 1]."""

    kind: str = ""

    def __init__(self, feature_names: list[str], config: LearnerConfig):
        self.feature_names = list(feature_names)
        self.config = config

    def score_matrix(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def params_dict(self) -> dict:
        raise NotImplementedError

    def to_dict(self) -> dict:
        return {
            "version": 1,
            "kind": self.kind,
            "config": self.config.to_dict(),
            "features": self.feature_names,
            "params": self.params_dict(),
        }


def select_features(model: Classifier, table: DataTable) -> np.ndarray:
    """Pull the model's training columns out of a table, by name."""
    available = set(table.column_names)
    for name in model.feature_names:
        if name not in available:
            raise SchemaError(f"table is missing column {name!r} required by the model")
    return table.matrix(model.feature_names)


def training_arrays(
    table: DataTable, weights: np.ndarray | None
) -> tuple[np.ndarray, np.ndarray, np.ndarray, list[str]]:
    names = table.model_input_names()
    X = table.matrix(names)
    y = table.y()
    if not np.all(np.isfinite(X)):
        raise NumericError("non-finite feature value in training data")
    if len(np.unique(y)) < 2:
        raise DegenerateTargetError("target column holds a single class")
    if weights is None:
        w = np.ones(table.n)
    else:
        w = np.asarray(weights, dtype=float)
        if w.shape != (table.n,):
            raise NumericError(f"weights length {w.shape} does not match n={table.n}")
        if not np.all(np.isfinite(w)) or np.any(w < 0):
            raise NumericError("weights must be finite and non-negative")
        if not np.any(w > 0):
            raise NumericError("weights must not be all zero")
    return X, y, w, names


def weighted_standardizer(X: np.ndarray, w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Weighted mean/std so duplicated rows and doubled weights agree."""
    wsum = w.sum()
    mu = (w[:, None] * X).sum(axis=0) / wsum
    var = (w[:, None] * (X - mu) ** 2).sum(axis=0) / wsum
    sigma = np.sqrt(var)
    sigma[sigma == 0.0] = 1.0
    return mu, sigma


def sigmoid(z: np.ndarray) -> np.ndarray:
    return expit(z)


def logit_loss(z: np.ndarray, y: np.ndarray, w: np.ndarray) -> float:
    """Weighted log-loss from logits: softplus(z) - y*z, exact and stable."""
    return float((w * (np.logaddexp(0.0, z) - y * z)).sum() / w.sum())
