"""ROC curves, AUC and accuracy for binary scores."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ValidationError


def _check(scores, labels):
    s = np.asarray(scores, dtype=np.float64).ravel()
    y = np.asarray(labels).ravel()
    if s.shape != y.shape or s.size == 0:
        raise ValidationError("scores and labels must be nonempty and equally long")
    if not np.all(np.isfinite(s)):
        raise ValidationError("scores must be finite")
    if not np.all(np.isin(y, (0, 1))):
        raise ValidationError("labels must be 0 or 1")
    return s, y.astype(bool)


def _roc_counts(s, y):
    """Cumulative (FP, TP) integer counts at each unique threshold, descending."""
    order = np.argsort(-s, kind="stable")
    s, y = s[order], y[order]
    last = np.r_[np.flatnonzero(np.diff(s)), s.size - 1]
    tp = np.cumsum(y)[last]
    fp = (last + 1) - tp
    return np.r_[0, fp].astype(np.int64), np.r_[0, tp].astype(np.int64)


def roc_points(scores, labels) -> tuple[np.ndarray, np.ndarray]:
    """(fpr, tpr) from (0, 0) to (1, 1), one point per unique score."""
    s, y = _check(scores, labels)
    P, N = int(y.sum()), int((~y).sum())
    if P == 0 or N == 0:
        raise ValidationError("ROC needs both classes")
    fp, tp = _roc_counts(s, y)
    return fp / N, tp / P


def auc(scores, labels) -> float:
    """Trapezoidal area under the ROC curve.

    Accumulated in integers: each threshold step adds dFP * (TP_prev + TP_cur),
    which sums to 2 * (wins + ties / 2), so the result equals the pair-counting
    probability P(s+ > s-) + P(s+ = s-) / 2 exactly.
    """
    s, y = _check(scores, labels)
    P, N = int(y.sum()), int((~y).sum())
    if P == 0 or N == 0:
        raise ValidationError("AUC is undefined for a single-class set")
    fp, tp = _roc_counts(s, y)
    twice = int(np.sum(np.diff(fp) * (tp[1:] + tp[:-1])))
    return twice / (2 * P * N)


@dataclass(frozen=True)
class Evaluation:
    accuracy: float
    auc: float | None
    fpr: tuple[float, ...]
    tpr: tuple[float, ...]
    n: int
    error: str | None = None

    def roc_points(self) -> list[list[float]]:
        return [[f, t] for f, t in zip(self.fpr, self.tpr)]


def evaluate(model, X, y) -> Evaluation:
    """Accuracy at the model's threshold plus ROC/AUC of its scores.

    A single-class test set still yields accuracy; AUC is then None and
    ``error`` says why.
    """
    scores = model.score(X)
    s, yb = _check(scores, y)
    acc = float(np.mean((s > model.threshold) == yb))
    try:
        a = auc(s, yb)
        fpr, tpr = roc_points(s, yb)
    except ValidationError as exc:
        return Evaluation(acc, None, (), (), s.size, str(exc))
    return Evaluation(acc, a, tuple(float(v) for v in fpr), tuple(float(v) for v in tpr), s.size)
