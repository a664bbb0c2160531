"""Feature matrices, train-only standardization and stratified holdout."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateSplit, ValidationError


@dataclass(frozen=True, eq=False)
class DataMatrix:
    X: np.ndarray
    y: np.ndarray
    columns: tuple[str, ...]
    subjects: tuple[str, ...] = ()

    def __post_init__(self):
        X = np.asarray(self.X, dtype=np.float64)
        y = np.asarray(self.y)
        if X.ndim != 2:
            raise ValidationError(f"feature matrix must be 2-D, got shape {X.shape}")
        if y.shape != (X.shape[0],):
            raise ValidationError(f"{y.shape[0] if y.ndim else 0} labels for {X.shape[0]} rows")
        if not np.all(np.isin(y, (0, 1))):
            raise ValidationError("labels must be 0 or 1")
        if not np.all(np.isfinite(X)):
            raise ValidationError("feature matrix contains NaN or Inf")
        columns = tuple(self.columns)
        if len(columns) != X.shape[1]:
            raise ValidationError(f"{len(columns)} column names for {X.shape[1]} columns")
        subjects = tuple(self.subjects) or tuple(str(i) for i in range(X.shape[0]))
        if len(subjects) != X.shape[0]:
            raise ValidationError("subject ids do not match row count")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y.astype(np.int64))
        object.__setattr__(self, "columns", columns)
        object.__setattr__(self, "subjects", subjects)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    def rows(self, idx) -> "DataMatrix":
        idx = np.asarray(idx, dtype=np.int64)
        return DataMatrix(self.X[idx], self.y[idx], self.columns, tuple(self.subjects[i] for i in idx))

    def select(self, cols) -> "DataMatrix":
        cols = [self.columns.index(c) if isinstance(c, str) else int(c) for c in cols]
        return DataMatrix(self.X[:, cols], self.y, tuple(self.columns[c] for c in cols), self.subjects)


@dataclass(frozen=True, eq=False)
class Standardizer:
    """Column centring and scaling with statistics from the training rows.

    Constant columns keep a scale of 1 so they map to 0.
    """
    mean: np.ndarray
    scale: np.ndarray

    @classmethod
    def fit(cls, X) -> "Standardizer":
        X = np.asarray(X, dtype=np.float64)
        mean = X.mean(axis=0)
        sd = X.std(axis=0)
        return cls(mean, np.where(sd > 1e-12 * np.maximum(np.abs(mean), 1.0), sd, 1.0))

    def transform(self, X) -> np.ndarray:
        return (np.asarray(X, dtype=np.float64) - self.mean) / self.scale

    def apply(self, data: DataMatrix) -> DataMatrix:
        return DataMatrix(self.transform(data.X), data.y, data.columns, data.subjects)


def is_standardized(X, tol: float = 1e-6) -> bool:
    """Columns have mean 0 and population SD 1 (or are identically 0)."""
    X = np.asarray(X, dtype=np.float64)
    if X.shape[0] == 0:
        return False
    mean = X.mean(axis=0)
    sd = X.std(axis=0)
    return bool(np.all(np.abs(mean) <= tol) and np.all((np.abs(sd - 1) <= tol) | (sd <= tol)))


def _check_binary(y, what="input"):
    y = np.asarray(y)
    if y.size == 0 or np.unique(y).size < 2:
        raise DegenerateSplit(f"{what} must contain both classes")
    return y


def holdout_split(y, ratio: float = 2 / 3, seed: int = 42) -> tuple[np.ndarray, np.ndarray]:
    """Stratified train/test row indices, ``ratio`` being the training fraction.

    Each class contributes round(n_c * (1 - ratio)) rows to the test set; both
    index arrays are returned sorted.
    """
    y = _check_binary(y)
    if not 0 < ratio < 1:
        raise ValidationError(f"split ratio must lie in (0, 1), got {ratio}")
    if y.size < 3:
        raise DegenerateSplit(f"need at least 3 subjects, got {y.size}")
    rng = np.random.default_rng(seed)
    test = []
    for c in (0, 1):
        idx = np.flatnonzero(y == c)
        n_test = int(np.floor(idx.size * (1 - ratio) + 0.5 + 1e-9))
        test.extend(rng.permutation(idx)[:n_test])
    test = np.sort(np.asarray(test, dtype=np.int64))
    train = np.setdiff1d(np.arange(y.size), test)
    return train, test


def stratified_folds(y, folds: int = 5, seed: int = 42) -> list[np.ndarray]:
    """Validation index arrays of a seeded stratified k-fold partition."""
    y = _check_binary(y, "fold input")
    counts = np.bincount(y, minlength=2)
    if counts.min() < folds:
        raise DegenerateSplit(f"{folds} folds need at least {folds} subjects per class, got {counts.tolist()}")
    rng = np.random.default_rng(seed)
    assign = np.empty(y.size, dtype=np.int64)
    for c in (0, 1):
        idx = rng.permutation(np.flatnonzero(y == c))
        assign[idx] = np.arange(idx.size) % folds
    return [np.flatnonzero(assign == f) for f in range(folds)]
