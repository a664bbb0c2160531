"""Principal components of a training matrix and their scree ratios."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ValidationError


@dataclass(frozen=True, eq=False)
class PcaResult:
    eigenvalues: np.ndarray
    components: np.ndarray  # columns are unit eigenvectors
    mean: np.ndarray

    @property
    def ratios(self) -> np.ndarray:
        total = self.eigenvalues.sum()
        if total <= 0:
            return np.zeros_like(self.eigenvalues)
        return self.eigenvalues / total

    def transform(self, X, components=None) -> np.ndarray:
        V = self.components if components is None else self.components[:, :components]
        return (np.asarray(X, dtype=np.float64) - self.mean) @ V


def pca(X) -> PcaResult:
    """Eigendecomposition of the sample covariance, eigenvalues descending."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 2:
        raise ValidationError("PCA needs a 2-D matrix with at least 2 rows")
    mean = X.mean(axis=0)
    Xc = X - mean
    cov = Xc.T @ Xc / (X.shape[0] - 1)
    vals, vecs = np.linalg.eigh(cov)
    order = np.argsort(vals, kind="stable")[::-1]
    vals = np.clip(vals[order], 0.0, None)
    return PcaResult(vals, vecs[:, order], mean)


def pca_scree(X, components=None) -> np.ndarray:
    """Explained-variance ratios, non-increasing, optionally truncated."""
    ratios = pca(X).ratios
    return ratios if components is None else ratios[:components]
