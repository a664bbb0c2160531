"""The pipeline stages and the cached end-to-end run.

Stage order: extract -> dynamics -> select -> train-eval.  Each stage reads
the files written by the one before, so any stage can also be run alone
from the command line.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
from collections import OrderedDict
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..dynamic import ColumnSpec, assemble_dynamic, dynamic_schema
from ..errors import DynradError, ValidationError
from ..features import extract_static, feature_names
from ..modellab import (DataMatrix, Standardizer, evaluate, holdout_split, lasso_select, pca_scree,
                        train)
from ..volume_io import ManifestEntry, load_manifest, load_sample
from . import tables
from .config import PipelineConfig

log = logging.getLogger(__name__)

STAGES = ("extract", "dynamics", "select", "train-eval")
STATIC_TRANSFORM = "STATIC"


class StageError(DynradError):
    def __init__(self, stage: str, cause: BaseException):
        self.stage = stage
        self.cause = cause
        super().__init__(f"[{stage}] {type(cause).__name__}: {cause}")


@contextmanager
def stage_guard(stage: str):
    try:
        yield
    except StageError:
        raise
    except Exception as exc:
        raise StageError(stage, exc) from exc


def worker_count() -> int:
    """Worker threads for per-subject work, capped by DYNRAD_THREADS."""
    default = min(4, os.cpu_count() or 1)
    raw = os.environ.get("DYNRAD_THREADS")
    if raw is None:
        return default
    try:
        n = int(raw)
    except ValueError:
        raise ValidationError(f"DYNRAD_THREADS must be an integer, got {raw!r}") from None
    if n < 1:
        raise ValidationError("DYNRAD_THREADS must be >= 1")
    return n


@dataclass
class StageReport:
    stage: str
    accepted: list[str]
    rejects: list[dict] = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"stage": self.stage, "accepted": self.accepted, "rejects": self.rejects, **self.extra}


def report_path_for(out_path) -> Path:
    p = Path(out_path)
    return p.with_name(p.stem + ".report.json")


# -- extract ----------------------------------------------------------------

def _extract_one(entry: ManifestEntry, config: PipelineConfig):
    try:
        sample = load_sample(entry)
        if sample.label != entry.label:
            raise ValidationError("label mismatch")
        return extract_static(sample, config.extract_config()), None
    except Exception as exc:  # reported per subject, the stage continues
        return None, f"{type(exc).__name__}: {exc}"


def extract_stage(manifest, config: PipelineConfig, out_csv, labels_out=None) -> StageReport:
    """Static features per (subject, timepoint) plus the labels table."""
    entries = load_manifest(manifest) if not isinstance(manifest, list) else manifest
    names = feature_names(config.dimensionality)
    with stage_guard("extract"):
        with ThreadPoolExecutor(max_workers=worker_count()) as pool:
            results = list(pool.map(lambda e: _extract_one(e, config), entries))
        rows, labels, report = [], OrderedDict(), StageReport("extract", [])
        for entry, (vectors, err) in zip(entries, results):
            if err is not None:
                log.warning("subject %s skipped: %s", entry.subject_id, err)
                report.rejects.append({"subjectId": entry.subject_id, "stage": "extract", "reason": err})
                continue
            report.accepted.append(entry.subject_id)
            labels[entry.subject_id] = entry.label
            for v in vectors:
                rows.append(tables.StaticRow(entry.subject_id, v.time_index, v.time, v.as_array()))
        tables.write_static(out_csv, names, rows)
        labels_out = Path(labels_out) if labels_out else Path(out_csv).with_name("labels.csv")
        tables.write_labels(labels_out, labels)
        tables.write_json(report_path_for(out_csv), report.to_dict())
    return report


# -- dynamics ---------------------------------------------------------------

def feature_set_name(config: PipelineConfig) -> str:
    if config.feature_mode == "static":
        return f"static:t{config.static_timepoint + 1}"
    parts = list(config.integrated) + list(config.discrete) + list(config.parameter)
    return "dynamic:" + "+".join(parts)


def _dynamic_rows(names, groups, config: PipelineConfig):
    expected = sorted({r.time_index for rows in groups.values() for r in rows})
    cfg = config.dynamic_config()
    columns = dynamic_schema(names, len(expected), cfg)
    subjects, X, rejects, guards, fits = [], [], [], {}, {}
    for sid, rows in groups.items():
        rows = sorted(rows, key=lambda r: r.time_index)
        got = [r.time_index for r in rows]
        if got != expected:
            missing = sorted(set(expected) - set(got))
            reason = f"incomplete series: missing time indices {missing}" if missing else \
                f"duplicate or unexpected time indices {got}"
            rejects.append({"subjectId": sid, "stage": "dynamics", "reason": reason})
            continue
        vectors = [dict(zip(names, r.values)) for r in rows]
        try:
            vec = assemble_dynamic(vectors, cfg, times=[r.time for r in rows], subject_id=sid)
        except DynradError as exc:
            rejects.append({"subjectId": sid, "stage": "dynamics", "reason": f"{type(exc).__name__}: {exc}"})
            continue
        subjects.append(sid)
        X.append([vec.entries[c.name] for c in columns])
        for key, n in vec.guard_events.items():
            guards[key] = guards.get(key, 0) + n
        if config.debug_fits:
            fits[sid] = vec.fit_diagnostics
    meta = {"featureSet": feature_set_name(config), "k": len(expected), "timeIndices": expected}
    return columns, subjects, X, rejects, dict(sorted(guards.items())), fits, meta


def _static_rows(names, groups, config: PipelineConfig):
    ti = config.static_timepoint
    columns = [ColumnSpec(n, STATIC_TRANSFORM, f"t{ti + 1}") for n in names]
    subjects, X, rejects = [], [], []
    for sid, rows in groups.items():
        hit = [r for r in rows if r.time_index == ti]
        if len(hit) != 1:
            rejects.append({"subjectId": sid, "stage": "dynamics", "reason": f"no unique timepoint index {ti}"})
            continue
        subjects.append(sid)
        X.append(list(hit[0].values))
    meta = {"featureSet": feature_set_name(config), "k": 1, "timeIndices": [ti]}
    return columns, subjects, X, rejects, {}, {}, meta


def dynamics_stage(static_csv, config: PipelineConfig, out_csv) -> StageReport:
    """One row per subject of dynamic (or single-timepoint static) features."""
    with stage_guard("dynamics"):
        names, groups = tables.read_static(static_csv)
        build = _static_rows if config.feature_mode == "static" else _dynamic_rows
        columns, subjects, X, rejects, guards, fits, meta = build(names, groups, config)
        X = np.asarray(X, dtype=np.float64).reshape(len(subjects), len(columns))
        tables.write_dynamic(out_csv, columns, subjects, X, meta)
        report = StageReport("dynamics", subjects, rejects, {"guardEvents": guards})
        tables.write_json(report_path_for(out_csv), report.to_dict())
        if config.debug_fits:
            tables.write_json(Path(out_csv).with_name("fits.json"), fits)
    for r in rejects:
        log.warning("subject %s rejected: %s", r["subjectId"], r["reason"])
    return report


# -- select -----------------------------------------------------------------

def _load_matrix(dynamic_csv, labels_csv) -> DataMatrix:
    names, subjects, X = tables.read_dynamic(dynamic_csv)
    labels = tables.read_labels(labels_csv)
    missing = [s for s in subjects if s not in labels]
    if missing:
        raise ValidationError(f"labels missing for subjects {missing[:5]}")
    return DataMatrix(X, [labels[s] for s in subjects], names, subjects)


def _rel(path: Path, base: Path) -> str:
    return os.path.relpath(Path(path).resolve(), Path(base).resolve())


def select_stage(dynamic_csv, labels_csv, config: PipelineConfig, out_json) -> dict:
    """Holdout split, train-only standardization and LASSO selection."""
    out_json = Path(out_json)
    with stage_guard("select"):
        data = _load_matrix(dynamic_csv, labels_csv)
        train_idx, test_idx = holdout_split(data.y, config.split_ratio, config.seed)
        train_rows = data.rows(train_idx)
        Xt = Standardizer.fit(train_rows.X).transform(train_rows.X)
        sel = lasso_select(Xt, train_rows.y, lambdas=config.lasso_lambdas, folds=config.lasso_folds,
                           one_se=config.one_se, seed=config.seed, n_lambda=config.lasso_n_lambda,
                           min_ratio=config.lasso_min_ratio)
        schema_file = tables.schema_path_for(dynamic_csv)
        feature_set = tables.read_json(schema_file).get("featureSet", "") if schema_file.exists() else ""
        doc = {
            "dynamicPath": _rel(dynamic_csv, out_json.parent),
            "labelsPath": _rel(labels_csv, out_json.parent),
            "featureSet": feature_set,
            "seed": config.seed,
            "train": list(train_rows.subjects),
            "test": [data.subjects[i] for i in test_idx],
            "selectedFeatures": [data.columns[i] for i in sel.indices],
            "lasso": {k: v for k, v in sel.to_dict().items() if k != "indices"},
        }
        tables.write_json(out_json, doc)
    log.info("selected %d of %d features", len(doc["selectedFeatures"]), len(data.columns))
    return doc


# -- train-eval -------------------------------------------------------------

def _model_options(kind: str, config: PipelineConfig) -> dict:
    if kind == "LINSVM":
        return {"C": config.svm_c, "epochs": config.svm_epochs}
    if kind == "FNN":
        return {"hidden": config.fnn_hidden, "epochs": config.fnn_epochs, "lr": config.fnn_lr}
    return {}


class _ConstantModel:
    threshold = 0.0

    def __init__(self, value: float):
        self.value = value

    def score(self, X):
        return np.full(np.asarray(X).shape[0], self.value)


def train_eval_stage(selected_json, config: PipelineConfig, out_json, roc_dir=None) -> dict:
    """Train every configured classifier on the selected features and score the test rows."""
    selected_json, out_json = Path(selected_json), Path(out_json)
    roc_dir = Path(roc_dir) if roc_dir else out_json.parent
    with stage_guard("train-eval"):
        sel = tables.read_json(selected_json)
        base = selected_json.parent
        data = _load_matrix(base / sel["dynamicPath"], base / sel["labelsPath"])
        index = {s: i for i, s in enumerate(data.subjects)}
        train_rows = data.rows([index[s] for s in sel["train"]])
        test_rows = data.rows([index[s] for s in sel["test"]])
        feats = sel["selectedFeatures"]
        models = []
        scree: list[float] = []
        if feats:
            train_rows, test_rows = train_rows.select(feats), test_rows.select(feats)
            st = Standardizer.fit(train_rows.X)
            Xtr, Xte = st.transform(train_rows.X), st.transform(test_rows.X)
            scree = [float(v) for v in pca_scree(Xtr)]
        for kind in config.classifiers:
            if feats:
                model = train(kind, Xtr, train_rows.y, seed=config.seed, **_model_options(kind, config))
                ev = evaluate(model, Xte, test_rows.y)
            else:
                # nothing selected: every subject gets the same score
                ev = evaluate(_ConstantModel(float(np.mean(train_rows.y) > 0.5) - 0.5), test_rows.X, test_rows.y)
            entry = {
                "model": kind,
                "featureSet": sel.get("featureSet", ""),
                "accuracy": ev.accuracy,
                "auc": ev.auc,
                "rocPoints": ev.roc_points(),
                "seed": config.seed,
            }
            if ev.error:
                entry["error"] = ev.error
            models.append(entry)
            tables.write_roc(roc_dir / f"roc_{kind}.csv", ev.fpr, ev.tpr)
        aucs = [m["auc"] for m in models if m["auc"] is not None]
        metrics = {
            "featureSet": sel.get("featureSet", ""),
            "seed": config.seed,
            "selectedFeatures": feats,
            "nTrain": train_rows.n,
            "nTest": test_rows.n,
            "models": models,
            "meanAuc": float(np.mean(aucs)) if aucs else None,
            "pcaScree": scree,
        }
        tables.write_json(out_json, metrics)
    return metrics


# -- whole run with caching -------------------------------------------------

def _sha(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _manifest_digest(manifest: Path, entries: list[ManifestEntry]) -> str:
    h = hashlib.sha256(manifest.read_bytes())
    seen = set()
    for e in entries:
        for _, vol, mask in e.timepoints:
            for p in (vol, mask):
                for f in (p.with_suffix(".json"), p.with_suffix(".raw")):
                    if f not in seen and f.exists():
                        seen.add(f)
                        h.update(f.name.encode())
                        h.update(f.read_bytes())
    return h.hexdigest()


def _key(stage: str, config_part: dict, inputs: list[str]) -> str:
    blob = json.dumps({"stage": stage, "config": config_part, "inputs": inputs}, sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()


@dataclass
class RunResult:
    ran: list[str]
    skipped: list[str]
    rejects: list[dict]
    metrics: dict


def run_pipeline(manifest, config: PipelineConfig, out_dir, resume: bool = False) -> RunResult:
    """All four stages into ``out_dir``; with ``resume`` a stage is skipped when
    its inputs and outputs still match the hashes recorded in ``stages.json``."""
    manifest = Path(manifest)
    out = Path(out_dir)
    entries = load_manifest(manifest)
    out.mkdir(parents=True, exist_ok=True)
    state_file = out / "stages.json"
    state = tables.read_json(state_file) if resume and state_file.exists() else {}
    files = {
        "extract": ["static.csv", "static.report.json", "labels.csv"],
        "dynamics": ["dynamic.csv", "dynamic.schema.json", "dynamic.report.json"]
        + (["fits.json"] if config.debug_fits else []),
        "select": ["selected.json"],
        "train-eval": ["metrics.json"] + [f"roc_{k}.csv" for k in config.classifiers],
    }
    sections = {
        "extract": config.section("dimensionality", "levels"),
        "dynamics": config.section("feature_mode", "static_timepoint", "integrated", "discrete",
                                   "parameter", "rescale_time", "debug_fits"),
        "select": config.section("split_ratio", "seed", "lasso_folds", "lasso_lambdas",
                                 "lasso_n_lambda", "lasso_min_ratio", "one_se"),
        "train-eval": config.section("classifiers", "seed", "svm_c", "svm_epochs", "fnn_hidden",
                                     "fnn_epochs", "fnn_lr"),
    }
    upstream = {
        "extract": [_manifest_digest(manifest, entries)],
        "dynamics": ["static.csv"],
        "select": ["dynamic.csv", "dynamic.schema.json", "labels.csv"],
        "train-eval": ["selected.json", "dynamic.csv", "labels.csv"],
    }
    actions = {
        "extract": lambda: extract_stage(entries, config, out / "static.csv", out / "labels.csv"),
        "dynamics": lambda: dynamics_stage(out / "static.csv", config, out / "dynamic.csv"),
        "select": lambda: select_stage(out / "dynamic.csv", out / "labels.csv", config, out / "selected.json"),
        "train-eval": lambda: train_eval_stage(out / "selected.json", config, out / "metrics.json", out),
    }
    ran, skipped = [], []
    new_state = {}
    for stage in STAGES:
        inputs = [x if stage == "extract" else _sha(out / x) for x in upstream[stage]]
        key = _key(stage, sections[stage], inputs)
        prev = state.get(stage)
        fresh = prev is not None and prev.get("key") == key and all(
            (out / f).exists() and _sha(out / f) == prev["outputs"].get(f) for f in files[stage])
        if fresh:
            log.info("stage %s up to date, skipped", stage)
            skipped.append(stage)
        else:
            log.info("running stage %s", stage)
            actions[stage]()
            ran.append(stage)
        new_state[stage] = {"key": key, "outputs": {f: _sha(out / f) for f in files[stage]}}
        tables.write_json(state_file, new_state)

    rejects = tables.read_json(out / "static.report.json")["rejects"] + \
        tables.read_json(out / "dynamic.report.json")["rejects"]
    tables.write_json(out / "rejects.json", {
        "subjects": [e.subject_id for e in entries],
        "accepted": tables.read_json(out / "dynamic.report.json")["accepted"],
        "rejects": rejects,
    })
    return RunResult(ran, skipped, rejects, tables.read_json(out / "metrics.json"))
