"""Dynamic features: integrated, discrete (pairwise) and parameter transforms.

Given the k-length series of one static feature, each transform maps it to a
fixed number of scalars.  ``assemble_dynamic`` applies the configured
transforms to every static feature and names the outputs
``<static>__<TRANSFORM>__<index>``, e.g. ``glcm_Idn__RCR__t1_t3``.

Reconstructed definitions (no published formula beyond the mean, the mean
absolute deviation, RCR and the degree-7 polynomial):

* SD   - population standard deviation
* CV   - SD / |mean|, 0 when the mean is 0 (counted as a guard event)
* RACR - |x - y| / ((|x| + |y|) / 2)
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import fitting
from .errors import SchemaMismatch, UnderdeterminedFit, ValidationError

EPS = 1e-12
SEP = "__"

INTEGRATED = ("MEAN", "SD", "DC", "CV")
DISCRETE = ("RCR", "RACR")
PARAMETER = tuple(fitting.FAMILIES)


@dataclass(frozen=True, eq=False)
class FeatureSeries:
    name: str
    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=np.float64)
        v = np.asarray(self.values, dtype=np.float64)
        if t.ndim != 1 or t.shape != v.shape:
            raise ValidationError(f"{self.name}: times and values must be equal-length vectors")
        if t.size < 2:
            raise ValidationError(f"{self.name}: a series needs k >= 2 points")
        if np.any(np.diff(t) <= 0):
            raise ValidationError(f"{self.name}: times must be strictly increasing")
        if not (np.all(np.isfinite(v)) and np.all(np.isfinite(t))):
            raise ValidationError(f"{self.name}: non-finite series values")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)

    @property
    def k(self) -> int:
        return self.values.size


def _values(series) -> np.ndarray:
    return series.values if isinstance(series, FeatureSeries) else np.asarray(series, dtype=np.float64)


# -- integrated -------------------------------------------------------------

def integrated_mean(series) -> float:
    return float(np.mean(_values(series)))


def integrated_dc(series) -> float:
    """Mean absolute deviation about the series mean."""
    v = _values(series)
    return float(np.mean(np.abs(v - v.mean())))


def integrated_sd(series) -> float:
    v = _values(series)
    return float(np.sqrt(np.mean((v - v.mean()) ** 2)))


def integrated_cv(series) -> float:
    v = _values(series)
    mu = abs(v.mean())
    if mu < EPS:
        return 0.0
    return integrated_sd(v) / mu


def cv_is_degenerate(series) -> bool:
    return abs(float(np.mean(_values(series)))) < EPS


# -- discrete ---------------------------------------------------------------

def rcr(x: float, y: float) -> float:
    """Relative change rate |x - y| / |y|, denominator floored at EPS."""
    return abs(x - y) / max(abs(y), EPS)


def racr(x: float, y: float) -> float:
    """Symmetric relative absolute change |x - y| / ((|x| + |y|) / 2)."""
    return abs(x - y) / max((abs(x) + abs(y)) / 2, EPS)


@dataclass(frozen=True)
class PairFunction:
    name: str
    fn: Callable[[np.ndarray, np.ndarray], np.ndarray]
    denominator: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None
    symmetric: bool = False

    def __call__(self, x, y):
        return self.fn(x, y)

    def guard_hits(self, x, y) -> np.ndarray:
        if self.denominator is None:
            return np.zeros(np.broadcast(x, y).shape, dtype=bool)
        return self.denominator(x, y) < EPS


PAIR_FUNCTIONS = {
    "RCR": PairFunction(
        "RCR",
        lambda x, y: np.abs(x - y) / np.maximum(np.abs(y), EPS),
        lambda x, y: np.abs(y),
    ),
    "RACR": PairFunction(
        "RACR",
        lambda x, y: np.abs(x - y) / np.maximum((np.abs(x) + np.abs(y)) / 2, EPS),
        lambda x, y: (np.abs(x) + np.abs(y)) / 2,
        symmetric=True,
    ),
    "DIFF": PairFunction("DIFF", lambda x, y: x - y),
}


def _pair_function(g) -> PairFunction | Callable:
    if isinstance(g, str):
        try:
            return PAIR_FUNCTIONS[g]
        except KeyError:
            raise ValidationError(f"unknown pair function {g!r}") from None
    return g


def discrete_matrix(series, g="RCR") -> np.ndarray:
    """k x k matrix with m_ij = g(v_i, v_j)."""
    g = _pair_function(g)
    v = _values(series)
    if isinstance(g, PairFunction):
        return np.asarray(g(v[:, None], v[None, :]), dtype=np.float64)
    return np.array([[g(a, b) for b in v] for a in v], dtype=np.float64)


def straighten_upper(M) -> np.ndarray:
    """Strict upper triangle in row-major order: (1,2), (1,3), ..., (k-1,k)."""
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {M.shape}")
    return M[np.triu_indices(M.shape[0], k=1)]


def pair_labels(k: int) -> list[str]:
    i, j = np.triu_indices(k, k=1)
    return [f"t{a + 1}_t{b + 1}" for a, b in zip(i, j)]


# -- parameter --------------------------------------------------------------

def parameter_features(series: FeatureSeries, family: str, rescale_time: bool = False,
                       seed=None) -> tuple[dict[str, float], fitting.FitResult]:
    """Fitted parameters of one model family plus the residual RMS.

    Keys are the family's parameter names and ``rms``.
    """
    fam = fitting.FAMILIES[family]
    t = series.times
    if rescale_time:
        t = (t - t[0]) / (t[-1] - t[0])
    if series.k < fam.n_params:
        raise UnderdeterminedFit(f"{family} needs k >= {fam.n_params}, got {series.k}")
    if fam.linear:
        res = fitting.fit_linear(t, series.values)
    else:
        res = fitting.fit_multistart(t, series.values, family, seed=seed)
    out = dict(zip(fam.param_names, (float(x) for x in res.theta)))
    out["rms"] = float(res.residual_rms)
    return out, res


# -- assembly ---------------------------------------------------------------

@dataclass(frozen=True)
class DynamicConfig:
    integrated: tuple[str, ...] = ()
    discrete: tuple[str, ...] = ("RCR",)
    parameter: tuple[str, ...] = ()
    rescale_time: bool = False

    def __post_init__(self):
        for attr, allowed in (("integrated", INTEGRATED), ("discrete", DISCRETE), ("parameter", PARAMETER)):
            vals = tuple(getattr(self, attr))
            object.__setattr__(self, attr, vals)
            unknown = [v for v in vals if v not in allowed]
            if unknown:
                raise ValidationError(f"unknown {attr} transforms {unknown}; allowed {allowed}")
        if not (self.integrated or self.discrete or self.parameter):
            raise ValidationError("at least one transform family must be enabled")

    def outputs_per_feature(self, k: int) -> int:
        n = len(self.integrated) + len(self.discrete) * k * (k - 1) // 2
        n += sum(fitting.FAMILIES[f].n_params + 1 for f in self.parameter)
        return n


@dataclass(frozen=True)
class ColumnSpec:
    static: str
    transform: str
    index: str

    @property
    def name(self) -> str:
        return SEP.join((self.static, self.transform, self.index)) if self.index else SEP.join(
            (self.static, self.transform))

    @classmethod
    def parse(cls, name: str) -> "ColumnSpec":
        parts = name.split(SEP)
        if len(parts) == 2:
            return cls(parts[0], parts[1], "")
        if len(parts) == 3:
            return cls(*parts)
        raise ValidationError(f"cannot parse dynamic column name {name!r}")


def dynamic_schema(static_names: Sequence[str], k: int, config: DynamicConfig) -> list[ColumnSpec]:
    """Column specs in output order: per static feature, integrated, discrete, parameter."""
    labels = pair_labels(k)
    cols = []
    for s in static_names:
        if SEP in s:
            raise ValidationError(f"static feature name {s!r} may not contain {SEP!r}")
        cols.extend(ColumnSpec(s, tr, "") for tr in config.integrated)
        for g in config.discrete:
            cols.extend(ColumnSpec(s, g, lab) for lab in labels)
        for fam in config.parameter:
            names = fitting.FAMILIES[fam].param_names + ("rms",)
            cols.extend(ColumnSpec(s, fam, p) for p in names)
    return cols


@dataclass(frozen=True)
class DynamicFeatureVector:
    entries: dict[str, float]
    guard_events: dict[str, int] = field(default_factory=dict)
    fit_diagnostics: dict[str, dict] = field(default_factory=dict)

    def as_array(self) -> np.ndarray:
        return np.fromiter(self.entries.values(), dtype=np.float64, count=len(self.entries))


_INTEGRATED_FN = {"MEAN": integrated_mean, "SD": integrated_sd, "DC": integrated_dc, "CV": integrated_cv}


def assemble_dynamic(static_vectors, config: DynamicConfig = DynamicConfig(), times=None,
                     subject_id: str = "") -> DynamicFeatureVector:
    """Dynamic feature vector from k per-timepoint static vectors.

    ``static_vectors`` holds objects with an ``entries`` mapping (or plain
    mappings).  ``times`` defaults to the vectors' ``time`` attribute, then to
    1..k.  Nonlinear fits are seeded from (subject_id, feature name).
    """
    maps = [getattr(v, "entries", v) for v in static_vectors]
    k = len(maps)
    if k < 2:
        raise ValidationError(f"need at least 2 static vectors, got {k}")
    names = list(maps[0])
    for i, m in enumerate(maps[1:], start=2):
        if list(m) != names:
            raise SchemaMismatch(f"static vector {i} has a different feature schema")
    if times is None:
        times = [getattr(v, "time", None) for v in static_vectors]
        if any(t is None for t in times):
            times = np.arange(1, k + 1, dtype=np.float64)
    times = np.asarray(times, dtype=np.float64)

    table = np.array([[m[n] for n in names] for m in maps], dtype=np.float64)  # (k, q)
    iu = np.triu_indices(k, k=1)
    labels = pair_labels(k)
    entries: dict[str, float] = {}
    guards: Counter = Counter()
    diagnostics: dict[str, dict] = {}
    for col, name in enumerate(names):
        series = FeatureSeries(name, times, table[:, col])
        v = series.values
        for tr in config.integrated:
            entries[f"{name}{SEP}{tr}"] = _INTEGRATED_FN[tr](v)
            if tr == "CV" and cv_is_degenerate(v):
                guards[f"{name}{SEP}CV"] += 1
        for gname in config.discrete:
            g = PAIR_FUNCTIONS[gname]
            x, y = v[iu[0]], v[iu[1]]
            vals = g(x, y)
            hits = g.guard_hits(x, y)
            for lab, val, hit in zip(labels, vals, hits):
                key = f"{name}{SEP}{gname}{SEP}{lab}"
                entries[key] = float(val)
                if hit:
                    guards[key] += 1
        for fam in config.parameter:
            params, res = parameter_features(series, fam, config.rescale_time,
                                             seed=fitting.fit_seed(subject_id, name))
            for p, val in params.items():
                entries[f"{name}{SEP}{fam}{SEP}{p}"] = val
            diagnostics[f"{name}{SEP}{fam}"] = res.to_dict()
    bad = [key for key, val in entries.items() if not math.isfinite(val)]
    if bad:
        raise ValidationError(f"non-finite dynamic features: {bad[:5]}")
    return DynamicFeatureVector(entries, dict(guards), diagnostics)
