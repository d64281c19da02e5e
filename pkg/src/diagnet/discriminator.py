"""Linear soft-margin SVM discriminator with a sigmoid probability output."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from diagnet import _core

DEFAULT_REGULARIZATION = 1e-2
DEFAULT_EPOCHS = 200


class DegenerateModel(ValueError):
    pass


@dataclass(frozen=True)
class LinearSvm:
    weights: np.ndarray
    bias: float
    regularization: float = DEFAULT_REGULARIZATION
    epochs: int = DEFAULT_EPOCHS
    rng_seed: int = 0

    def decision(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        return (X * self.weights).sum(axis=1) + self.bias

    def hinge_loss(self, X, y) -> float:
        """Mean hinge loss plus ``regularization / 2 * |w|^2`` (bias included)."""
        margins = np.asarray(y, dtype=np.float64) * self.decision(X)
        w2 = float(self.weights @ self.weights) + self.bias * self.bias
        return float(np.maximum(0.0, 1.0 - margins).mean()) + 0.5 * self.regularization * w2

    def predict(self, X) -> np.ndarray:
        return np.where(self.decision(X) >= 0, 1, -1)


def train(positives, negatives, regularization: float = DEFAULT_REGULARIZATION,
          epochs: int = DEFAULT_EPOCHS, seed: int = 0) -> LinearSvm:
    """Fit a linear SVM by Pegasos: ``epochs * n`` single-sample steps of size ``1/(reg * t)``.

    Positives are labeled +1, negatives -1. The bias is learned as the weight
    of a constant feature, so it is regularized along with the weights.
    """
    P = np.atleast_2d(np.asarray(positives, dtype=np.float64))
    N = np.atleast_2d(np.asarray(negatives, dtype=np.float64))
    if P.size == 0 or N.size == 0:
        raise ValueError("both positive and negative sides need at least one sample")
    if P.shape[1] != N.shape[1]:
        raise ValueError(f"dimension mismatch: {P.shape[1]} vs {N.shape[1]}")
    if regularization <= 0 or epochs < 1:
        raise ValueError("need regularization > 0 and epochs >= 1")
    X = np.vstack([P, N])
    Xa = np.hstack([X, np.ones((len(X), 1))])
    y = np.concatenate([np.ones(len(P)), -np.ones(len(N))])
    rng = np.random.default_rng(seed)
    order = rng.integers(0, len(X), size=epochs * len(X))
    w = _core.pegasos_train(Xa, y, regularization, order)
    return LinearSvm(w[:-1].copy(), float(w[-1]), regularization, epochs, seed)


def signed_distance(svm: LinearSvm, x) -> np.ndarray | float:
    """``(w . x + b) / |w|``; accepts one sample or a stack of rows."""
    norm = float(np.sqrt(svm.weights @ svm.weights))
    if norm < 1e-12:
        raise DegenerateModel("discriminator weight vector has zero norm")
    x = np.asarray(x, dtype=np.float64)
    d = svm.decision(x) / norm
    return float(d[0]) if x.ndim == 1 else d


def _sigmoid(z):
    z = np.asarray(z, dtype=np.float64)
    # split by sign so exp never overflows
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def probability(svm: LinearSvm, x) -> np.ndarray | float:
    """Logistic sigmoid of the signed distance: how strongly ``x`` sits on the positive side."""
    d = signed_distance(svm, x)
    p = _sigmoid(np.atleast_1d(d))
    return float(p[0]) if np.ndim(d) == 0 else p
