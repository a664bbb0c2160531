"""Three small binary classifiers: shrinkage LDA, linear SVM, one-hidden-layer net.

All training is deterministic given the inputs (and the seed for the net).
Scores are larger for class 1; ``predict`` compares against ``threshold``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from ..errors import DegenerateSplit, ValidationError

log = logging.getLogger(__name__)

KINDS = ("LDA", "LINSVM", "FNN")


@dataclass(frozen=True, eq=False)
class TrainedModel:
    kind: str
    params: dict
    threshold: float = 0.0
    history: tuple[float, ...] = field(default=())

    def score(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        p = self.params
        if self.kind in ("LDA", "LINSVM"):
            return X @ p["w"] + p["b"]
        if self.kind == "FNN":
            return _fnn_forward(p, X)[1]
        raise ValidationError(f"unknown model kind {self.kind!r}")

    def predict(self, X) -> np.ndarray:
        return (self.score(X) > self.threshold).astype(np.int64)


def _check_train(X, y):
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    if X.ndim != 2 or y.shape != (X.shape[0],):
        raise ValidationError("training data must be an (n, d) matrix with n labels")
    if np.unique(y).size < 2:
        raise DegenerateSplit("training data must contain both classes")
    return X, y.astype(np.int64)


# -- LDA --------------------------------------------------------------------

def train_lda(X, y) -> TrainedModel:
    """Fisher discriminant on the pooled covariance plus a 1e-6 * trace/d ridge."""
    X, y = _check_train(X, y)
    n, d = X.shape
    mu0, mu1 = X[y == 0].mean(axis=0), X[y == 1].mean(axis=0)
    centred = np.where((y == 1)[:, None], X - mu1, X - mu0)
    S = centred.T @ centred / max(n - 2, 1)
    tr = np.trace(S)
    ridge = 1e-6 * tr / d if tr > 0 else 1e-6
    if np.linalg.matrix_rank(S) < d:
        log.warning("pooled covariance is singular (d=%d, n=%d); relying on shrinkage", d, n)
    w = np.linalg.solve(S + ridge * np.eye(d), mu1 - mu0)
    prior = np.log(np.mean(y == 1) / np.mean(y == 0))
    b = float(-w @ (mu0 + mu1) / 2 + prior)
    return TrainedModel("LDA", {"w": w, "b": b, "ridge": ridge}, 0.0)


# -- linear SVM -------------------------------------------------------------

def svm_objective(X, s, w, b, lam) -> float:
    margins = s * (X @ w + b)
    return float(lam / 2 * w @ w + np.mean(np.maximum(0.0, 1.0 - margins)))


def train_linsvm(X, y, C: float = 1.0, epochs: int = 1000) -> TrainedModel:
    """Hinge loss + L2 penalty by full-batch subgradient descent.

    Minimises (lam/2)||w||^2 + mean(hinge) with lam = 1/C, step 1/(lam (t+1)).
    The best iterate by objective is kept.
    """
    X, y = _check_train(X, y)
    if C <= 0:
        raise ValidationError(f"C must be positive, got {C}")
    lam = 1.0 / C
    s = 2.0 * y - 1.0
    n, d = X.shape
    w = np.zeros(d)
    b = 0.0
    best = (svm_objective(X, s, w, b, lam), w.copy(), b)
    history = [best[0]]
    for t in range(epochs):
        eta = 1.0 / (lam * (t + 1))
        active = s * (X @ w + b) < 1.0
        gw = lam * w - (s[active] @ X[active]) / n
        gb = -s[active].sum() / n
        w = w - eta * gw
        b = b - eta * gb
        obj = svm_objective(X, s, w, b, lam)
        history.append(obj)
        if obj < best[0]:
            best = (obj, w.copy(), b)
    _, w, b = best
    return TrainedModel("LINSVM", {"w": w, "b": float(b), "lam": lam}, 0.0, tuple(history))


# -- feedforward net --------------------------------------------------------

def _fnn_forward(p, X):
    h = np.tanh(X @ p["W1"] + p["b1"])
    return h, expit(h @ p["w2"] + p["b2"])


def fnn_loss_and_grad(p: dict, X, y) -> tuple[float, dict]:
    """Mean binary cross-entropy and its gradient with respect to every parameter."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = X.shape[0]
    h, out = _fnn_forward(p, X)
    z = h @ p["w2"] + p["b2"]
    # log(1 + e^z) - y z, evaluated stably
    loss = float(np.mean(np.logaddexp(0.0, z) - y * z))
    dz = (out - y) / n
    dh = np.outer(dz, p["w2"]) * (1.0 - h ** 2)
    grads = {
        "W1": X.T @ dh,
        "b1": dh.sum(axis=0),
        "w2": h.T @ dz,
        "b2": float(dz.sum()),
    }
    return loss, grads


def init_fnn(d: int, hidden: int = 16, seed: int = 42) -> dict:
    rng = np.random.default_rng(seed)
    return {
        "W1": rng.standard_normal((d, hidden)) / np.sqrt(max(d, 1)),
        "b1": np.zeros(hidden),
        "w2": rng.standard_normal(hidden) / np.sqrt(hidden),
        "b2": 0.0,
    }


def train_fnn(X, y, hidden: int = 16, epochs: int = 500, lr: float = 0.1, seed: int = 42) -> TrainedModel:
    """One tanh hidden layer, logistic output, full-batch gradient descent."""
    X, y = _check_train(X, y)
    if hidden < 1 or epochs < 0 or lr <= 0:
        raise ValidationError("hidden >= 1, epochs >= 0 and lr > 0 required")
    p = init_fnn(X.shape[1], hidden, seed)
    history = []
    for _ in range(epochs):
        loss, g = fnn_loss_and_grad(p, X, y)
        history.append(loss)
        p = {k: p[k] - lr * g[k] for k in p}
    history.append(fnn_loss_and_grad(p, X, y)[0])
    return TrainedModel("FNN", p, 0.5, tuple(history))


def train(kind: str, X, y, seed: int = 42, **options) -> TrainedModel:
    if kind == "LDA":
        return train_lda(X, y)
    if kind == "LINSVM":
        return train_linsvm(X, y, **options)
    if kind == "FNN":
        return train_fnn(X, y, seed=seed, **options)
    raise ValidationError(f"unknown classifier {kind!r}; expected one of {KINDS}")
