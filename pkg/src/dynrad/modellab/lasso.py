"""LASSO by cyclic coordinate descent, and cross-validated feature selection.

Objective: (1/2n) ||y - Xw - b||^2 + lam ||w||_1 with y in {-1, +1}.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from ..errors import ValidationError
from .data import Standardizer, is_standardized, stratified_folds

log = logging.getLogger(__name__)


def _signed(y) -> np.ndarray:
    y = np.asarray(y, dtype=np.float64)
    if np.all(np.isin(y, (0.0, 1.0))):
        return 2.0 * y - 1.0
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise ValidationError("LASSO targets must be 0/1 or -1/+1")
    return y


def _correlations(X, r) -> np.ndarray:
    # shared by lambda_max and the KKT screen so both see identical values
    return (X.T @ r) / X.shape[0]


def lambda_max(X, y) -> float:
    """Smallest lam whose solution is w = 0."""
    y = _signed(y)
    X = np.asarray(X, dtype=np.float64)
    return float(np.max(np.abs(_correlations(X, y - y.mean())))) if X.shape[1] else 0.0


def soft_threshold(z: float, lam: float) -> float:
    if z > lam:
        return z - lam
    if z < -lam:
        return z + lam
    return 0.0


@dataclass
class LassoResult:
    w: np.ndarray
    b: float
    lam: float
    n_sweeps: int
    converged: bool
    objective: list[float] = field(default_factory=list)

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.w)


def lasso_objective(X, y, w, b, lam) -> float:
    r = _signed(y) - X @ w - b
    return float(r @ r / (2 * X.shape[0]) + lam * np.abs(w).sum())


def _sign_step(X, y, w, b, lam, active):
    """Move towards the minimiser of the fixed-sign quadratic on ``active``.

    The step stops where the first coefficient reaches zero, so the objective
    along it equals that convex quadratic and cannot increase.
    """
    n = X.shape[0]
    sign = np.sign(w[active])
    A = np.column_stack([X[:, active], np.ones(n)])
    rhs = A.T @ y - n * np.r_[lam * sign, 0.0]
    target = np.linalg.lstsq(A.T @ A, rhs, rcond=None)[0]
    cur = np.r_[w[active], b]
    delta = target - cur
    t, hit = 1.0, None
    crossing = np.flatnonzero(np.sign(target[:-1]) != sign)
    for j in crossing:
        tj = cur[j] / (cur[j] - target[j])
        if tj < t:
            t, hit = tj, j
    new = cur + t * delta
    if hit is not None:
        new[hit] = 0.0
    w_new = np.zeros_like(w)
    w_new[active] = new[:-1]
    return w_new, float(new[-1])


def lasso_fit(X, y, lam: float, max_iter: int = 10000, tol: float = 1e-7, w0=None,
              check: bool = True) -> LassoResult:
    """Coordinate descent with an active set.

    Each sweep visits the current nonzero coefficients plus every coordinate
    whose optimality condition is violated at the start of the sweep; the
    intercept is refreshed after every sweep.  Each sweep is followed by a
    step towards the exact minimiser for the current support and signs,
    kept only if it does not raise the objective.  Stops when no coordinate moves by more than ``tol`` and no
    zero coordinate violates its condition.
    """
    X = np.asarray(X, dtype=np.float64)
    y = _signed(y)
    if lam < 0:
        raise ValidationError(f"lambda must be >= 0, got {lam}")
    if check and not is_standardized(X):
        raise ValidationError("LASSO expects standardized columns (mean 0, SD 1)")
    n, d = X.shape
    col_sq = np.einsum("ij,ij->j", X, X) / n
    w = np.zeros(d) if w0 is None else np.array(w0, dtype=np.float64)
    b = float(np.mean(y - X @ w))
    r = y - X @ w - b

    def objective(r, w):
        return float(r @ r / (2 * n) + lam * np.abs(w).sum())

    history = [objective(r, w)]
    converged = False
    sweeps = 0
    while sweeps < max_iter:
        z = _correlations(X, r)
        violators = (w == 0) & (np.abs(z) > lam) & (col_sq > 0)
        visit = np.flatnonzero((w != 0) | violators)
        max_delta = 0.0
        for j in visit:
            xj = X[:, j]
            old = w[j]
            zj = xj @ r / n + old * col_sq[j]
            new = soft_threshold(zj, lam) / col_sq[j]
            if new != old:
                r -= (new - old) * xj
                w[j] = new
                max_delta = max(max_delta, abs(new - old))
        shift = float(np.mean(r))
        b += shift
        r -= shift
        sweeps += 1
        obj = objective(r, w)
        active = np.flatnonzero(w)
        if max_delta >= tol and active.size:
            w_new, b_new = _sign_step(X, y, w, b, lam, active)
            r_new = y - X @ w_new - b_new
            obj_new = objective(r_new, w_new)
            if obj_new <= obj:
                w, b, r, obj = w_new, b_new, r_new, obj_new
        history.append(obj)
        if max_delta < tol and not violators.any():
            converged = True
            break
    if not converged:
        log.warning("LASSO did not converge in %d sweeps at lambda=%g", max_iter, lam)
    return LassoResult(w, b, float(lam), sweeps, converged, history)


def lambda_grid(X, y, n: int = 30, min_ratio: float = 1e-3) -> np.ndarray:
    lmax = lambda_max(X, y)
    return lmax * np.logspace(0, np.log10(min_ratio), n)


@dataclass
class LassoSelection:
    indices: np.ndarray
    lam: float
    lambdas: np.ndarray
    cv_mean: np.ndarray
    cv_se: np.ndarray
    coef: np.ndarray

    def to_dict(self) -> dict:
        return {
            "indices": [int(i) for i in self.indices],
            "lambda": float(self.lam),
            "lambdas": [float(v) for v in self.lambdas],
            "cvMean": [float(v) for v in self.cv_mean],
            "cvSE": [float(v) for v in self.cv_se],
        }


def _path(X, y, lambdas, **kw) -> list[LassoResult]:
    """Warm-started fits down the (descending) grid.

    The path stops early once the support reaches n - 1 columns: past that
    point the fit interpolates the training rows and coordinate descent
    crawls.
    """
    out, w = [], None
    for lam in lambdas:
        res = lasso_fit(X, y, lam, w0=w, check=False, **kw)
        out.append(res)
        w = res.w
        if res.support.size >= X.shape[0] - 1:
            break
    return out


def lasso_select(X, y, lambdas=None, folds: int = 5, one_se: bool = True, seed: int = 42,
                 n_lambda: int = 30, min_ratio: float | None = None) -> LassoSelection:
    """Pick lam by stratified k-fold CV squared error and return its support.

    Each fold is re-standardized with its own training rows.  With ``one_se``
    the largest lam whose CV error is within one standard error of the
    minimum is used.  Grid values past the point where some fold's path
    saturated are dropped.  The default grid spans lam_max down to lam_max * 1e-3
    (1e-2 when there are more columns than rows, where the small-lam end is
    both slow and uninformative).  The final fit is on all of ``X``.
    """
    X = np.asarray(X, dtype=np.float64)
    y01 = np.asarray(y)
    ys = _signed(y01)
    labels = ((ys + 1) / 2).astype(np.int64)
    if lambdas is None:
        if min_ratio is None:
            min_ratio = 1e-2 if X.shape[0] < X.shape[1] else 1e-3
        lambdas = lambda_grid(X, ys, n_lambda, min_ratio)
    lambdas = np.sort(np.asarray(lambdas, dtype=np.float64))[::-1]
    val_sets = stratified_folds(labels, folds, seed)
    errors = np.full((folds, lambdas.size), np.nan)
    for f, val in enumerate(val_sets):
        train = np.setdiff1d(np.arange(X.shape[0]), val)
        st = Standardizer.fit(X[train])
        Xt, Xv = st.transform(X[train]), st.transform(X[val])
        for i, res in enumerate(_path(Xt, ys[train], lambdas)):
            pred = Xv @ res.w + res.b
            errors[f, i] = np.mean((ys[val] - pred) ** 2)
    # keep the part of the grid every fold reached
    complete = np.all(np.isfinite(errors), axis=0)
    reached = lambdas.size if complete.all() else int(np.argmin(complete))
    lambdas, errors = lambdas[:reached], errors[:, :reached]
    cv_mean = errors.mean(axis=0)
    cv_se = errors.std(axis=0, ddof=1) / np.sqrt(folds)
    best = int(np.argmin(cv_mean))
    pick = best
    if one_se:
        ok = np.flatnonzero(cv_mean <= cv_mean[best] + cv_se[best])
        pick = int(ok.min())  # lambdas are descending, so the smallest index is the largest lam
    final = _path(X, ys, lambdas[: pick + 1])[-1]
    return LassoSelection(final.support, float(lambdas[pick]), lambdas, cv_mean, cv_se, final.w)
