"""Acceptance gate: one test per criterion, each printing a pass/fail line.

Run alone with ``pytest tests/test_acceptance.py -s``; the summary block at
the end of any pytest run lists every criterion that executed.
"""

from __future__ import annotations

import logging
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

import oracles
from dynrad import fitting
from dynrad.dynamic import DynamicConfig, assemble_dynamic
from dynrad.errors import NoNeighborhood, NoPairs
from dynrad.features import DIRECTIONS_2D, DIRECTIONS_3D, glcm, glrlm, glszm, ngtdm
from dynrad.grid import QuantizedRoi
from dynrad.modellab import Standardizer, auc, lambda_max, lasso_fit
from dynrad.pipeline import (PipelineConfig, SynthSpec, dynamics_stage, extract_stage, generate,
                             select_stage, train_eval_stage)
from dynrad.pipeline.cli import main as cli_main

pytestmark = pytest.mark.acceptance

T8 = np.arange(1.0, 9.0)


# 1 -------------------------------------------------------------------------

def _same_padded(a, b):
    # run and zone matrices may carry trailing all-zero length columns
    w = max(a.shape[1], b.shape[1])
    pad = lambda M: np.pad(M, ((0, 0), (0, w - M.shape[1])))
    return a.shape[0] == b.shape[0] and np.array_equal(pad(a), pad(b))


def _matrices_agree(codes, levels):
    q = QuantizedRoi(codes, levels, 0.0, 1.0)
    dirs = DIRECTIONS_2D if codes.shape[0] == 1 else DIRECTIONS_3D
    for d in dirs:
        ref = oracles.glcm(codes, d, levels)
        if ref.sum() == 0:
            with pytest.raises(NoPairs):
                glcm(q, d)
        elif not np.array_equal(glcm(q, d).data, ref):
            return f"GLCM {d}"
        if not _same_padded(glrlm(q, d).data, oracles.glrlm(codes, d, levels)):
            return f"GLRLM {d}"
    if not _same_padded(glszm(q).data, oracles.glszm(codes, levels)):
        return "GLSZM"
    n_ref, s_ref = oracles.ngtdm(codes, levels)
    if sum(n_ref) == 0:
        with pytest.raises(NoNeighborhood):
            ngtdm(q)
        return None
    M = ngtdm(q).data
    if not np.array_equal(M[:, 0], np.array(n_ref, dtype=float)):
        return "NGTDM n_a"
    # s_a are rational; the oracle keeps them exact, the scan sums floats
    s_exact = np.array([float(s) for s in s_ref])
    if not np.allclose(M[:, 1], s_exact, rtol=1e-12, atol=1e-12):
        return "NGTDM s_a"
    return None


def test_criterion_1_texture_oracles(acceptance):
    rng = np.random.default_rng(2024)
    start = time.perf_counter()
    failures = []
    for i in range(200):
        codes, levels = oracles.random_codes(rng)
        bad = _matrices_agree(codes, levels)
        if bad:
            failures.append((i, codes.shape, levels, bad))
    elapsed = time.perf_counter() - start
    ok = not failures and elapsed < 60
    acceptance(1, ok, f"texture matrices vs brute force on 200 ROIs: {len(failures)} mismatches, {elapsed:.1f}s")
    assert not failures, failures[:3]
    assert elapsed < 60


# 2 -------------------------------------------------------------------------

def test_criterion_2_count_law(acceptance):
    names = ["a", "b", "c"]
    bad = []
    for g in ("RCR", "RACR"):
        cfg = DynamicConfig(discrete=(g,))
        for k in range(2, 11):
            vecs = [{n: float(i + j + 1) for j, n in enumerate(names)} for i in range(k)]
            vec = assemble_dynamic(vecs, cfg)
            per = [sum(1 for key in vec.entries if key.startswith(n + "__")) for n in names]
            if per != [k * (k - 1) // 2] * len(names):
                bad.append((g, k, per))
    k8 = len(assemble_dynamic([{"x": float(i + 1)} for i in range(8)]).entries)
    ok = not bad and k8 == 28
    acceptance(2, ok, f"k(k-1)/2 outputs per feature for k=2..10, k=8 -> {k8}")
    assert not bad
    assert k8 == 28


# 3 -------------------------------------------------------------------------

def _exact_series(rng, k):
    # integers times a power of two: scaling by 0.5, 3 or 100 and the
    # pairwise differences are then exact in binary floating point
    mant = rng.integers(1, 2 ** 30, size=k) * rng.choice([-1, 1], size=k)
    return mant * 2.0 ** int(rng.integers(-20, 10))


def test_criterion_3_scale_invariance(acceptance):
    rng = np.random.default_rng(7)
    cfg = DynamicConfig(discrete=("RCR", "RACR"))
    mismatches = 0
    for _ in range(1000):
        v = _exact_series(rng, int(rng.integers(2, 11)))
        base = assemble_dynamic([{"f": x} for x in v], cfg).as_array()
        for c in (0.5, 3.0, 100.0):
            scaled = assemble_dynamic([{"f": c * x} for x in v], cfg).as_array()
            mismatches += not np.array_equal(base, scaled)

    # arbitrary doubles: c * v is itself rounded before the transform sees it,
    # so only closeness can hold; reported for information
    worst = 0.0
    for _ in range(200):
        v = rng.normal(size=int(rng.integers(2, 11))) * 10 ** rng.uniform(-3, 3)
        base = assemble_dynamic([{"f": x} for x in v], cfg).as_array()
        for c in (0.5, 3.0, 100.0):
            scaled = assemble_dynamic([{"f": c * x} for x in v], cfg).as_array()
            worst = max(worst, float(np.max(np.abs(scaled - base) / np.abs(base))))
    acceptance(3, mismatches == 0,
               f"RCR/RACR bit-identical under c in {{0.5, 3, 100}} on 1000 exactly scalable series "
               f"({mismatches} mismatches); arbitrary doubles worst rel. deviation {worst:.1e}")
    assert mismatches == 0


# 4 -------------------------------------------------------------------------

def _sigline_truth(rng):
    return np.array([rng.uniform(0.5, 2) * rng.choice([-1, 1]), rng.uniform(1, 3), rng.uniform(3, 6),
                     rng.uniform(0.5, 1.5), rng.uniform(0.1, 0.5) * rng.choice([-1, 1])])


def _gamma_truth(rng):
    return np.array([rng.uniform(1, 3), rng.uniform(0.2, 0.8), rng.uniform(1, 3), rng.uniform(0.05, 0.3),
                     rng.uniform(0.2, 1.0)])


def _recovery_rate(family, truth_fn, n=100):
    fam = fitting.FAMILIES[family]
    hits = 0
    for i in range(n):
        rng = np.random.default_rng(1000 + i)
        theta = truth_fn(rng)
        y = fam.evaluate(T8, theta)
        res = fitting.fit(T8, y, family, seed=fitting.fit_seed(family, str(i)))
        hits += bool(np.max(np.abs(res.theta - theta) / np.abs(theta)) < 1e-3)
    return hits


def _jacobian_worst(family, draw, n=100):
    """Largest max|J - FD| / max|J| over n random (t, theta) draws.

    Scaled by the whole Jacobian: central differences carry a rounding error
    of about eps * |m| / h in every column, which swamps small columns such
    as POLY7's t**1 next to t**7.
    """
    fam = fitting.FAMILIES[family]
    worst = 0.0
    for i in range(n):
        rng = np.random.default_rng(500 + i)
        theta = draw(rng)
        t = np.sort(rng.uniform(0.1, 10.0, 8))
        J = fam.jacobian(t, theta)
        fd = np.empty_like(J)
        for j in range(fam.n_params):
            h = 1e-6 * (1 + abs(theta[j]))
            up, dn = theta.copy(), theta.copy()
            up[j] += h
            dn[j] -= h
            fd[:, j] = (fam.evaluate(t, up) - fam.evaluate(t, dn)) / (2 * h)
        worst = max(worst, float(np.max(np.abs(J - fd)) / np.max(np.abs(J))))
    return worst


def _poly_jacobian_exact(n=100):
    # POLY7 is linear in theta, so its Jacobian can be checked exactly per entry
    worst = 0.0
    for i in range(n):
        t = np.random.default_rng(i).uniform(0.1, 10.0, 8)
        J = fitting.FAMILIES["POLY7"].jacobian(t, np.zeros(7))
        exact = np.array([[float(Fraction(x) ** (j + 1)) for j in range(7)] for x in t])
        worst = max(worst, float(np.max(np.abs(J - exact) / exact)))
    return worst


def test_criterion_4_fit_recovery(acceptance):
    poly_worst = 0.0
    for i in range(100):
        rng = np.random.default_rng(i)
        a = rng.uniform(-1, 1, 7)
        res = fitting.fit_linear(T8, fitting.FAMILIES["POLY7"].evaluate(T8, a))
        poly_worst = max(poly_worst, float(np.max(np.abs(res.theta - a) / np.abs(a))))
    sig = _recovery_rate("SIGLINE5", _sigline_truth)
    gam = _recovery_rate("GAMMA5", _gamma_truth)
    jac = {
        "POLY7": _jacobian_worst("POLY7", lambda r: r.uniform(-1, 1, 7)),
        "SIGLINE5": _jacobian_worst("SIGLINE5", _sigline_truth),
        "GAMMA5": _jacobian_worst("GAMMA5", _gamma_truth),
    }
    poly_exact = _poly_jacobian_exact()
    ok = poly_worst < 1e-6 and sig >= 95 and gam >= 95 and max(jac.values()) < 1e-5 and poly_exact < 1e-5
    acceptance(4, ok, f"POLY7 worst rel. err {poly_worst:.1e}; recovery SIGLINE5 {sig}/100, GAMMA5 {gam}/100; "
                      f"Jacobian vs central differences worst {max(jac.values()):.1e}, "
                      f"POLY7 Jacobian vs exact per entry {poly_exact:.1e}")
    assert poly_worst < 1e-6
    assert sig >= 95 and gam >= 95
    assert max(jac.values()) < 1e-5, jac
    assert poly_exact < 1e-5


# 5 -------------------------------------------------------------------------

def test_criterion_5_lasso(acceptance):
    zero_ok, ls_worst, rise_worst = True, 0.0, 0.0
    for s in range(50):
        rng = np.random.default_rng(s)
        X = rng.standard_normal((20, 10))
        X = Standardizer.fit(X).transform(X)
        y = np.r_[np.zeros(10), np.ones(10)][rng.permutation(20)]
        lmax = lambda_max(X, y)
        for lam in (lmax, 1.5 * lmax, 10 * lmax):
            zero_ok &= bool(np.all(lasso_fit(X, y, lam).w == 0.0))
        res = lasso_fit(X, y, 0.0)
        A = np.column_stack([X, np.ones(20)])
        ref = np.linalg.lstsq(A, 2 * y - 1, rcond=None)[0]
        ls_worst = max(ls_worst, float(np.max(np.abs(res.w - ref[:10]))))
        for lam in (0.0, 0.05 * lmax, 0.3 * lmax):
            obj = np.array(lasso_fit(X, y, lam).objective)
            rise_worst = max(rise_worst, float(np.max(np.diff(obj) / obj[0])))
    # a rise at the level of one rounding error of the objective sum is tolerated
    mono_ok = rise_worst <= 1e-14
    ok = zero_ok and ls_worst < 1e-6 and mono_ok
    acceptance(5, ok, f"w=0 for lam>=lam_max: {zero_ok}; lam=0 vs least squares max diff {ls_worst:.1e}; "
                      f"largest per-sweep objective rise {rise_worst:.1e} (relative)")
    assert zero_ok
    assert ls_worst < 1e-6
    assert mono_ok


# 6 -------------------------------------------------------------------------

def test_criterion_6_auc(acceptance):
    rng = np.random.default_rng(11)
    mismatches = 0
    cases = 0
    for n in range(2, 51):
        for _ in range(20):
            labels = rng.integers(0, 2, n)
            if labels.min() == labels.max():
                labels[0] = 1 - labels[0]
            # few distinct values so ties are common
            scores = rng.integers(0, int(rng.integers(1, 6)) + 1, n) / 4.0 if rng.random() < 0.5 \
                else rng.normal(size=n)
            cases += 1
            mismatches += auc(scores, labels) != oracles.auc_pairs(list(scores), list(labels))
    perfect = auc([0.1, 0.2, 0.8, 0.9], [0, 0, 1, 1])
    constant = auc([0.3] * 6, [0, 1, 0, 1, 1, 0])
    ok = mismatches == 0 and perfect == 1.0 and constant == 0.5
    acceptance(6, ok, f"trapezoid AUC == pair counting on {cases} sets up to 50 samples ({mismatches} "
                      f"mismatches); perfect {perfect}, constant {constant}")
    assert mismatches == 0
    assert perfect == 1.0 and constant == 0.5


# 7 -------------------------------------------------------------------------

def _benchmark_seed(seed: int, root: Path) -> tuple[float, float, float]:
    start = time.perf_counter()
    manifest = generate(SynthSpec(seed=seed), root / "data")
    synth_done = time.perf_counter()
    extract_stage(manifest, PipelineConfig(), root / "static.csv")
    aucs = []
    for mode in ("dynamic", "static"):
        cfg = PipelineConfig(feature_mode=mode)
        dynamics_stage(root / "static.csv", cfg, root / mode / "dynamic.csv")
        select_stage(root / mode / "dynamic.csv", root / "labels.csv", cfg, root / mode / "selected.json")
        m = train_eval_stage(root / mode / "selected.json", cfg, root / mode / "metrics.json")
        aucs.append(m["meanAuc"])
    return aucs[0], aucs[1], time.perf_counter() - synth_done


def test_criterion_7_synthetic_benchmark(acceptance, tmp_path):
    logging.disable(logging.WARNING)
    try:
        rows = [_benchmark_seed(seed, tmp_path / f"seed{seed}") for seed in range(10)]
    finally:
        logging.disable(logging.NOTSET)
    wins = sum(dyn >= 0.9 and stat <= 0.7 for dyn, stat, _ in rows)
    slowest = max(r[2] for r in rows)
    summary = ", ".join(f"{d:.2f}/{s:.2f}" for d, s, _ in rows)
    ok = wins >= 8 and slowest < 300
    acceptance(7, ok, f"dynamic-RCR >= 0.9 and static <= 0.7 (mean AUC over LDA/LINSVM/FNN) in {wins}/10 seeds "
                      f"[{summary}]; slowest seed {slowest:.1f}s")
    assert wins >= 8
    assert slowest < 300


# 8 -------------------------------------------------------------------------

def test_criterion_8_determinism(acceptance, tmp_path):
    manifest = generate(SynthSpec(subjects_per_class=8, seed=3), tmp_path / "data")
    codes = [cli_main(["run", "--manifest", str(manifest), "--out", str(tmp_path / d)]) for d in ("a", "b")]
    files_a = sorted(p.relative_to(tmp_path / "a") for p in (tmp_path / "a").rglob("*") if p.is_file())
    files_b = sorted(p.relative_to(tmp_path / "b") for p in (tmp_path / "b").rglob("*") if p.is_file())
    differing = [str(f) for f in files_a if (tmp_path / "a" / f).read_bytes() != (tmp_path / "b" / f).read_bytes()]
    ok = codes == [0, 0] and files_a == files_b and not differing and len(files_a) > 0
    acceptance(8, ok, f"two runs produced {len(files_a)} files, {len(differing)} differing bytes-wise")
    assert codes == [0, 0]
    assert files_a == files_b
    assert not differing
