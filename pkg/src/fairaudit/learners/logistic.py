"""Weighted logistic regression trained by full-batch gradient descent."""

from __future__ import annotations

import numpy as np
from scipy.special import expit

from ..errors import TrainingDivergedError
from .base import Classifier, LearnerConfig, sigmoid, weighted_standardizer

DEFAULT_LR = 0.1
DEFAULT_EPOCHS = 5000


class LogisticModel(Classifier):
    kind = "logistic"

    def __init__(self, feature_names, config, coef, bias, mu, sigma):
        super().__init__(feature_names, config)
        self.coef = np.asarray(coef, dtype=float)
        self.bias = float(bias)
        self.mu = np.asarray(mu, dtype=float)
        self.sigma = np.asarray(sigma, dtype=float)

    def score_matrix(self, X: np.ndarray) -> np.ndarray:
        Xs = (X - self.mu) / self.sigma
        return sigmoid(Xs @ self.coef + self.bias)

    def params_dict(self) -> dict:
        return {
            "coef": self.coef.tolist(),
            "bias": self.bias,
            "mu": self.mu.tolist(),
            "sigma": self.sigma.tolist(),
        }


def value_and_grad(
    theta: np.ndarray, Xs: np.ndarray, y: np.ndarray, w: np.ndarray, l2: float
) -> tuple[float, np.ndarray]:
    """Weighted log-loss (normalized by total weight) with L2 on the coefs.

    theta packs [coef..., bias]; the bias is not regularized.
    """
    coef, bias = theta[:-1], theta[-1]
    z = Xs @ coef + bias
    p = sigmoid(z)
    wsum = w.sum()
    loss = (w * (np.logaddexp(0.0, z) - y * z)).sum() / wsum
    loss += 0.5 * l2 * float(coef @ coef)
    resid = w * (p - y) / wsum
    grad = np.empty_like(theta)
    grad[:-1] = Xs.T @ resid + l2 * coef
    grad[-1] = resid.sum()
    return float(loss), grad


def fit_logistic(
    X: np.ndarray, y: np.ndarray, w: np.ndarray, names: list[str], config: LearnerConfig
) -> LogisticModel:
    lr = config.lr if config.lr is not None else DEFAULT_LR
    epochs = config.epochs if config.epochs is not None else DEFAULT_EPOCHS
    mu, sigma = weighted_standardizer(X, w)
    Xs = (X - mu) / sigma
    wsum = w.sum()
    n, d = X.shape
    coef = np.zeros(d)
    bias = 0.0
    z = np.empty(n)
    p = np.empty(n)
    resid = np.empty(n)
    for epoch in range(epochs):
        np.dot(Xs, coef, out=z)
        z += bias
        expit(z, out=p)
        np.subtract(p, y, out=resid)
        resid *= w
        resid /= wsum
        gcoef = Xs.T @ resid + config.l2 * coef
        gbias = resid.sum()
        gmax = max(float(np.max(np.abs(gcoef))), abs(gbias)) if d else abs(gbias)
        if not np.isfinite(gmax):
            raise TrainingDivergedError(epoch)
        if gmax < config.tol:
            break
        coef = coef - lr * gcoef
        bias = bias - lr * gbias
    return LogisticModel(names, config, coef, bias, mu, sigma)
