"""Least-squares fitting of parametric time curves.

Three model families are available:

``POLY7``    sum_{i=1..7} a_i t^i  (no intercept)
``SIGLINE5`` (P2 + P5 t) / (1 + exp(-P4 (t - P3))) + P1
``GAMMA5``   A (1 - exp(-alpha t))^q exp(-beta t) (1 + exp(-gamma t)) / 2

POLY7 is solved directly with a column-equilibrated QR factorisation; the
nonlinear families use Levenberg-Marquardt with bound projection.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import ndimage
from scipy.linalg import solve_triangular
from scipy.special import expit

from .errors import UnderdeterminedFit, ValidationError

COND_WARN = 1e8


@dataclass(frozen=True)
class ModelFamily:
    name: str
    param_names: tuple[str, ...]
    evaluate: Callable[[np.ndarray, np.ndarray], np.ndarray]
    jacobian: Callable[[np.ndarray, np.ndarray], np.ndarray]
    lower: np.ndarray
    linear: bool = False

    @property
    def n_params(self) -> int:
        return len(self.param_names)

    def project(self, theta: np.ndarray) -> np.ndarray:
        return np.maximum(theta, self.lower)


# -- POLY7 ------------------------------------------------------------------

def _poly_design(t):
    t = np.asarray(t, dtype=np.float64)
    return t[:, None] ** np.arange(1, 8)[None, :]


def _poly_eval(t, theta):
    return _poly_design(t) @ np.asarray(theta, dtype=np.float64)


def _poly_jac(t, theta):
    return _poly_design(t)


# -- SIGLINE5 ---------------------------------------------------------------

def _sigline_eval(t, theta):
    p1, p2, p3, p4, p5 = theta
    t = np.asarray(t, dtype=np.float64)
    return (p2 + p5 * t) * expit(p4 * (t - p3)) + p1


def _sigline_jac(t, theta):
    p1, p2, p3, p4, p5 = theta
    t = np.asarray(t, dtype=np.float64)
    s = expit(p4 * (t - p3))
    ds = s * (1.0 - s)
    lin = p2 + p5 * t
    return np.column_stack([
        np.ones_like(t),
        s,
        -lin * ds * p4,
        lin * ds * (t - p3),
        t * s,
    ])


# -- GAMMA5 -----------------------------------------------------------------

def _gamma_parts(t, theta):
    A, alpha, q, beta, gamma = theta
    t = np.asarray(t, dtype=np.float64)
    ea = np.exp(-alpha * t)
    u = -np.expm1(-alpha * t)  # 1 - exp(-alpha t), accurate for small alpha t
    pos = u > 0
    safe_u = np.where(pos, u, 1.0)
    log_u = np.where(pos, np.log(safe_u), 0.0)
    uq = np.where(pos, np.exp(q * log_u), 1.0 if q == 0 else 0.0)
    eb = np.exp(-beta * t)
    eg = np.exp(-gamma * t)
    h = (1.0 + eg) / 2.0
    return t, A, q, ea, u, pos, log_u, uq, eb, eg, h


def _gamma_eval(t, theta):
    t, A, q, ea, u, pos, log_u, uq, eb, eg, h = _gamma_parts(t, theta)
    return A * uq * eb * h


def _gamma_jac(t, theta):
    t, A, q, ea, u, pos, log_u, uq, eb, eg, h = _gamma_parts(t, theta)
    base = uq * eb * h
    # d/dalpha of u^q = q u^(q-1) t e^{-alpha t}; taken as 0 where u = 0
    uq1 = np.where(pos, np.exp((q - 1.0) * log_u), 0.0)
    return np.column_stack([
        base,
        A * q * uq1 * t * ea * eb * h,
        A * base * log_u,
        -t * A * base,
        A * uq * eb * (-t * eg / 2.0),
    ])


FAMILIES: dict[str, ModelFamily] = {
    "POLY7": ModelFamily("POLY7", tuple(f"a{i}" for i in range(1, 8)), _poly_eval, _poly_jac,
                         np.full(7, -np.inf), linear=True),
    "SIGLINE5": ModelFamily("SIGLINE5", ("P1", "P2", "P3", "P4", "P5"), _sigline_eval, _sigline_jac,
                            np.full(5, -np.inf)),
    "GAMMA5": ModelFamily("GAMMA5", ("A", "alpha", "q", "beta", "gamma"), _gamma_eval, _gamma_jac,
                          np.array([-np.inf, 0.0, 0.0, 0.0, 0.0])),
}


@dataclass
class FitResult:
    family: str
    theta: np.ndarray
    residual_rms: float
    iterations: int
    converged: bool
    condition_warning: bool = False
    cost_history: list[float] = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "theta": [float(x) for x in self.theta],
            "residualRMS": float(self.residual_rms),
            "iterations": int(self.iterations),
            "converged": bool(self.converged),
            "conditionWarning": bool(self.condition_warning),
        }


def _family(family) -> ModelFamily:
    if isinstance(family, ModelFamily):
        return family
    try:
        return FAMILIES[family]
    except KeyError:
        raise ValidationError(f"unknown model family {family!r}") from None


def _check_series(times, values, n_params: int, name: str):
    t = np.asarray(times, dtype=np.float64)
    y = np.asarray(values, dtype=np.float64)
    if t.ndim != 1 or t.shape != y.shape:
        raise ValidationError("times and values must be equal-length vectors")
    if t.size < n_params:
        raise UnderdeterminedFit(f"{name} has {n_params} parameters but only {t.size} samples")
    if np.unique(t).size != t.size:
        raise ValidationError("times must be distinct")
    return t, y


def _rms(r: np.ndarray) -> float:
    return float(np.sqrt(np.mean(r ** 2)))


def fit_linear(times, values, family="POLY7") -> FitResult:
    """Least squares for a linear-in-parameters family via QR.

    Columns are scaled to unit norm before factorising; ``condition_warning``
    is raised when the condition number of the scaled design exceeds 1e8.
    """
    fam = _family(family)
    if not fam.linear:
        raise ValidationError(f"{fam.name} is not linear in its parameters")
    t, y = _check_series(times, values, fam.n_params, fam.name)
    X = fam.jacobian(t, np.zeros(fam.n_params))
    scale = np.linalg.norm(X, axis=0)
    scale[scale == 0] = 1.0
    Xs = X / scale
    Q, R = np.linalg.qr(Xs)
    theta = solve_triangular(R, Q.T @ y) / scale
    cond = np.linalg.cond(Xs)
    r = y - X @ theta
    return FitResult(fam.name, theta, _rms(r), 1, True, bool(cond > COND_WARN))


def fit_lm(times, values, family, init, max_iter: int = 200, lam0: float = 1e-3,
           ftol: float = 1e-10, gtol: float = 1e-10) -> FitResult:
    """Levenberg-Marquardt with Marquardt diagonal scaling.

    The damping starts at ``lam0``, grows 10x on a rejected step and shrinks
    10x on an accepted one.  Iteration stops when the relative cost decrease
    of an accepted step drops below ``ftol``, the gradient infinity norm
    below ``gtol``, or after ``max_iter`` iterations (``converged=False``).
    Parameters are projected onto the family's lower bounds after each step.
    """
    fam = _family(family)
    t, y = _check_series(times, values, fam.n_params, fam.name)
    theta = fam.project(np.asarray(init, dtype=np.float64).copy())
    r = fam.evaluate(t, theta) - y
    cost = 0.5 * float(r @ r)
    history = [cost]
    lam = lam0
    converged = False
    it = 0
    while it < max_iter:
        it += 1
        J = fam.jacobian(t, theta)
        if not np.all(np.isfinite(J)):
            break
        g = J.T @ r
        pinned = (theta <= fam.lower) & (g > 0)
        if cost == 0.0 or np.max(np.abs(np.where(pinned, 0.0, g))) < gtol:
            converged = True
            break
        # parameters pinned at a bound with the descent direction pointing outside stay fixed
        free = ~pinned
        Jf = J[:, free]
        d = np.sum(Jf * Jf, axis=0)
        d = np.maximum(d, 1e-12 * max(d.max(), 1e-300))
        rhs = np.concatenate([-r, np.zeros(d.size)])
        accepted = False
        while lam < 1e16:
            aug = np.vstack([Jf, np.diag(np.sqrt(lam * d))])
            step = np.zeros_like(theta)
            step[free] = np.linalg.lstsq(aug, rhs, rcond=None)[0]
            cand = fam.project(theta + step)
            r_new = fam.evaluate(t, cand) - y
            cost_new = 0.5 * float(r_new @ r_new)
            if np.isfinite(cost_new) and cost_new < cost:
                accepted = True
                break
            lam *= 10.0
        if not accepted:
            # no descent direction left at any damping
            converged = True
            break
        rel = (cost - cost_new) / cost
        theta, r, cost = cand, r_new, cost_new
        history.append(cost)
        lam = max(lam / 10.0, 1e-12)
        if rel < ftol:
            converged = True
            break
    return FitResult(fam.name, theta, _rms(r), it, converged, cost_history=history)


def default_init(family, times, values) -> np.ndarray:
    fam = _family(family)
    t = np.asarray(times, dtype=np.float64)
    y = np.asarray(values, dtype=np.float64)
    span = float(t[-1] - t[0]) or 1.0
    if fam.name == "SIGLINE5":
        return np.array([y.min(), y.max() - y.min(), (t[0] + t[-1]) / 2.0, 1.0 / span, 0.0])
    if fam.name == "GAMMA5":
        return np.array([y.max(), 1.0 / span, 1.0, 1.0 / span, 1.0 / span])
    return np.zeros(fam.n_params)


def fit_seed(*parts: str) -> int:
    """Stable 32-bit seed from strings (Python's ``hash`` is salted per process)."""
    digest = hashlib.sha256("\x1f".join(parts).encode()).digest()
    return int.from_bytes(digest[:4], "little")


def _basin_minima(res: np.ndarray, top: int) -> np.ndarray:
    """Flat indices of grid points that are local minima of ``res``, best first."""
    res = np.where(np.isfinite(res), res, np.inf)
    is_min = res == ndimage.minimum_filter(res, size=3, mode="nearest")
    idx = np.flatnonzero(is_min & np.isfinite(res))
    return idx[np.argsort(res.ravel()[idx], kind="stable")][:top]


def _gamma_grid_starts(t, y, top, n=12):
    span = float(t[-1] - t[0]) or 1.0
    alpha = np.geomspace(0.15, 20.0, n) / span
    beta = np.concatenate([[0.0], np.geomspace(0.035, 10.0, n - 1) / span])
    gamma = np.geomspace(0.15, 35.0, n) / span
    q = np.geomspace(0.3, 8.0, n)
    a, qq, b, g = np.meshgrid(alpha, q, beta, gamma, indexing="ij")
    T = t[None, None, None, None, :]
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        f = (-np.expm1(-a[..., None] * T)) ** qq[..., None] * np.exp(-b[..., None] * T) \
            * (1.0 + np.exp(-g[..., None] * T)) / 2.0
        fy = f @ y
        ff = np.einsum("...k,...k->...", f, f)
        amp = fy / np.maximum(ff, 1e-300)
        res = y @ y - fy * amp
    idx = _basin_minima(res, top)
    return [np.array([amp.flat[i], a.flat[i], qq.flat[i], b.flat[i], g.flat[i]]) for i in idx]


def _sigline_grid_starts(t, y, top, n=24):
    span = float(t[-1] - t[0]) or 1.0
    mid = np.linspace(t[0] - span / 2, t[-1] + span / 2, n)
    rate = np.geomspace(0.3, 100.0, n // 2) / span
    rate = np.concatenate([-rate[::-1], rate])
    m3, m4 = np.meshgrid(mid, rate, indexing="ij")
    sig = expit(m4[..., None] * (t - m3[..., None]))
    X = np.stack([np.ones_like(sig), sig, t * sig], axis=-1)  # (n, n, k, 3)
    coef = np.linalg.pinv(X) @ y
    res = np.sum((y - np.einsum("...kj,...j->...k", X, coef)) ** 2, axis=-1)
    idx = _basin_minima(res, top)
    c = coef.reshape(-1, 3)
    return [np.array([c[i, 0], c[i, 1], m3.flat[i], m4.flat[i], c[i, 2]]) for i in idx]


_GRID_STARTS = {"GAMMA5": _gamma_grid_starts, "SIGLINE5": _sigline_grid_starts}


def fit_multistart(times, values, family, n_jitter: int = 3, n_grid: int = 20, seed=None,
                   jitter: float = 0.5, init=None) -> FitResult:
    """Best LM fit over several starts.

    Starts are tried in order: the default init, ``n_jitter`` randomly
    perturbed copies of it (seeded), then up to ``n_grid`` basin
    representatives from a coarse grid over the nonlinear parameters with the
    linear ones solved exactly.  Stops early once the fit is exact to
    rounding.
    """
    fam = _family(family)
    t, y = _check_series(times, values, fam.n_params, fam.name)
    theta0 = default_init(fam, t, y) if init is None else np.asarray(init, dtype=np.float64)
    rng = np.random.default_rng(seed)
    starts = [theta0]
    scale = np.abs(theta0) + 0.1 * (np.abs(theta0).max() + np.std(y) + 1e-12)
    for _ in range(n_jitter):
        z = rng.standard_normal(fam.n_params)
        # positive-bounded parameters are jittered multiplicatively
        bounded = np.isfinite(fam.lower) & (theta0 > 0)
        starts.append(np.where(bounded, theta0 * np.exp(jitter * z), theta0 + jitter * scale * z))
    grid = _GRID_STARTS.get(fam.name)
    if grid is not None and n_grid > 0:
        starts.extend(grid(t, y, n_grid))

    exact = 1e-10 * (np.abs(y).max() + 1e-300)
    best = None
    for start in starts:
        res = fit_lm(t, y, fam, start)
        if best is None or res.residual_rms < best.residual_rms:
            best = res
        if best.residual_rms <= exact:
            break
    return best


def fit(times, values, family, seed=None) -> FitResult:
    fam = _family(family)
    if fam.linear:
        return fit_linear(times, values, fam)
    return fit_multistart(times, values, fam, seed=seed)
