"""Feed-forward net: one tanh hidden layer, sigmoid output, full-batch GD.

`value_and_grad` is the reference implementation over a flat parameter
vector (used for finite-difference checks); `Workspace` computes the same
floats with preallocated buffers, which is what the training loops use.
The adversarial trainer reuses both the workspace and `grad_from_dz`.
"""

from __future__ import annotations

import numpy as np
from scipy.special import expit

from ..errors import TrainingDivergedError
from .base import Classifier, LearnerConfig, sigmoid, weighted_standardizer

DEFAULT_LR = 0.01
DEFAULT_EPOCHS = 600


def init_params(d: int, hidden: int, rng: np.random.Generator) -> np.ndarray:
    w1 = rng.normal(0.0, 1.0 / np.sqrt(d), size=(d, hidden))
    b1 = np.zeros(hidden)
    w2 = rng.normal(0.0, 1.0 / np.sqrt(hidden), size=hidden)
    b2 = np.zeros(1)
    return np.concatenate([w1.ravel(), b1, w2, b2])


def unpack(params: np.ndarray, d: int, hidden: int):
    i = d * hidden
    w1 = params[:i].reshape(d, hidden)
    b1 = params[i : i + hidden]
    w2 = params[i + hidden : i + 2 * hidden]
    b2 = params[-1]
    return w1, b1, w2, b2


def forward(params: np.ndarray, Xs: np.ndarray, hidden: int):
    """Returns (logits, hidden activations)."""
    d = Xs.shape[1]
    w1, b1, w2, b2 = unpack(params, d, hidden)
    h = np.tanh(Xs @ w1 + b1)
    z = h @ w2 + b2
    return z, h


def grad_from_dz(
    params: np.ndarray, Xs: np.ndarray, h: np.ndarray, dz: np.ndarray, hidden: int, l2: float
) -> np.ndarray:
    """Parameter gradient given dLoss/dlogit per row; L2 applies to weights."""
    d = Xs.shape[1]
    w1, b1, w2, b2 = unpack(params, d, hidden)
    gw2 = h.T @ dz + l2 * w2
    gb2 = dz.sum()
    dh = np.outer(dz, w2) * (1.0 - h * h)
    gw1 = Xs.T @ dh + l2 * w1
    gb1 = dh.sum(axis=0)
    return np.concatenate([gw1.ravel(), gb1, gw2, [gb2]])


def value_and_grad(
    params: np.ndarray, Xs: np.ndarray, y: np.ndarray, w: np.ndarray, hidden: int, l2: float
) -> tuple[float, np.ndarray]:
    """Weighted log-loss normalized by total weight, L2 on both weight mats."""
    z, h = forward(params, Xs, hidden)
    p = sigmoid(z)
    wsum = w.sum()
    loss = (w * (np.logaddexp(0.0, z) - y * z)).sum() / wsum
    d = Xs.shape[1]
    w1, _, w2, _ = unpack(params, d, hidden)
    loss += 0.5 * l2 * (float((w1 * w1).sum()) + float(w2 @ w2))
    dz = w * (p - y) / wsum
    return float(loss), grad_from_dz(params, Xs, h, dz, hidden, l2)


class Workspace:
    """Preallocated forward/backward buffers; bitwise-matches the reference."""

    def __init__(self, Xs: np.ndarray, hidden: int):
        n, d = Xs.shape
        self.Xs = Xs
        self.hidden = hidden
        self.zh = np.empty((n, hidden))
        self.h = np.empty((n, hidden))
        self.dh = np.empty((n, hidden))
        self.tmp = np.empty((n, hidden))
        self.z = np.empty(n)
        self.p = np.empty(n)

    def forward(self, params: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        d = self.Xs.shape[1]
        w1, b1, w2, b2 = unpack(params, d, self.hidden)
        np.dot(self.Xs, w1, out=self.zh)
        self.zh += b1
        np.tanh(self.zh, out=self.h)
        np.dot(self.h, w2, out=self.z)
        self.z += b2
        expit(self.z, out=self.p)
        return self.z, self.p

    def loss(self, y: np.ndarray, w: np.ndarray, params: np.ndarray, l2: float) -> float:
        wsum = w.sum()
        loss = (w * (np.logaddexp(0.0, self.z) - y * self.z)).sum() / wsum
        d = self.Xs.shape[1]
        w1, _, w2, _ = unpack(params, d, self.hidden)
        return float(loss + 0.5 * l2 * (float((w1 * w1).sum()) + float(w2 @ w2)))

    def grad_from_dz(self, params: np.ndarray, dz: np.ndarray, l2: float) -> np.ndarray:
        d = self.Xs.shape[1]
        w1, b1, w2, b2 = unpack(params, d, self.hidden)
        gw2 = self.h.T @ dz + l2 * w2
        gb2 = dz.sum()
        np.multiply(dz[:, None], w2[None, :], out=self.dh)
        np.multiply(self.h, self.h, out=self.tmp)
        np.subtract(1.0, self.tmp, out=self.tmp)
        self.dh *= self.tmp
        gw1 = self.Xs.T @ self.dh + l2 * w1
        gb1 = self.dh.sum(axis=0)
        return np.concatenate([gw1.ravel(), gb1, gw2, [gb2]])


class MLPModel(Classifier):
    kind = "mlp"

    def __init__(self, feature_names, config, params, mu, sigma, hidden):
        super().__init__(feature_names, config)
        self.params = np.asarray(params, dtype=float)
        self.mu = np.asarray(mu, dtype=float)
        self.sigma = np.asarray(sigma, dtype=float)
        self.hidden = hidden

    def score_matrix(self, X: np.ndarray) -> np.ndarray:
        Xs = (X - self.mu) / self.sigma
        z, _ = forward(self.params, Xs, self.hidden)
        return sigmoid(z)

    def params_dict(self) -> dict:
        return {
            "params": self.params.tolist(),
            "mu": self.mu.tolist(),
            "sigma": self.sigma.tolist(),
            "hidden": self.hidden,
        }


def train_loop(
    Xs: np.ndarray,
    y: np.ndarray,
    w: np.ndarray,
    hidden: int,
    l2: float,
    lr: float,
    epochs: int,
    tol: float,
    rng: np.random.Generator,
) -> np.ndarray:
    params = init_params(Xs.shape[1], hidden, rng)
    work = Workspace(Xs, hidden)
    wsum = w.sum()
    for epoch in range(epochs):
        z, p = work.forward(params)
        loss = work.loss(y, w, params, l2)
        if not np.isfinite(loss):
            raise TrainingDivergedError(epoch)
        dz = w * (p - y) / wsum
        grad = work.grad_from_dz(params, dz, l2)
        if np.max(np.abs(grad)) < tol:
            break
        params = params - lr * grad
    return params


def fit_mlp(
    X: np.ndarray, y: np.ndarray, w: np.ndarray, names: list[str], config: LearnerConfig
) -> MLPModel:
    lr = config.lr if config.lr is not None else DEFAULT_LR
    epochs = config.epochs if config.epochs is not None else DEFAULT_EPOCHS
    mu, sigma = weighted_standardizer(X, w)
    Xs = (X - mu) / sigma
    rng = np.random.default_rng(config.seed)
    params = train_loop(Xs, y, w, config.hidden, config.l2, lr, epochs, config.tol, rng)
    return MLPModel(names, config, params, mu, sigma, config.hidden)
