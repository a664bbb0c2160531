"""Slow, loop-based reference implementations used only by the tests.

These walk voxels one at a time and share no code with the package.
"""

from __future__ import annotations

import itertools
from collections import deque
from fractions import Fraction

import numpy as np


def _inside(codes, v):
    p, m, n = codes.shape
    z, y, x = v
    return 0 <= z < p and 0 <= y < m and 0 <= x < n and codes[z, y, x] > 0


def voxels(codes):
    p, m, n = codes.shape
    for z in range(p):
        for y in range(m):
            for x in range(n):
                if codes[z, y, x] > 0:
                    yield (z, y, x)


def glcm(codes, offset, levels):
    C = np.zeros((levels, levels), dtype=np.int64)
    for v in voxels(codes):
        w = tuple(a + b for a, b in zip(v, offset))
        if _inside(codes, w):
            C[codes[v] - 1, codes[w] - 1] += 1
    return C + C.T


def glrlm(codes, direction, levels):
    p, m, n = codes.shape
    R = np.zeros((levels, max(p, m, n)), dtype=np.int64)
    for v in voxels(codes):
        a = codes[v]
        prev = tuple(c - d for c, d in zip(v, direction))
        if _inside(codes, prev) and codes[prev] == a:
            continue  # not the start of a run
        length, w = 1, tuple(c + d for c, d in zip(v, direction))
        while _inside(codes, w) and codes[w] == a:
            length += 1
            w = tuple(c + d for c, d in zip(w, direction))
        R[a - 1, length - 1] += 1
    return R


def glszm(codes, levels):
    n_vox = int((codes > 0).sum())
    Z = np.zeros((levels, n_vox), dtype=np.int64)
    seen = set()
    steps = [d for d in itertools.product((-1, 0, 1), repeat=3) if d != (0, 0, 0)]
    for v in voxels(codes):
        if v in seen:
            continue
        a = codes[v]
        size, queue = 0, deque([v])
        seen.add(v)
        while queue:
            u = queue.popleft()
            size += 1
            for d in steps:
                w = tuple(c + e for c, e in zip(u, d))
                if w not in seen and _inside(codes, w) and codes[w] == a:
                    seen.add(w)
                    queue.append(w)
        Z[a - 1, size - 1] += 1
    return Z


def ngtdm(codes, levels):
    """(n_a as ints, s_a as exact Fractions); voxels without neighbours are skipped."""
    n_a = [0] * levels
    s_a = [Fraction(0)] * levels
    steps = [d for d in itertools.product((-1, 0, 1), repeat=3) if d != (0, 0, 0)]
    for v in voxels(codes):
        nb = [codes[w] for w in (tuple(c + e for c, e in zip(v, d)) for d in steps) if _inside(codes, w)]
        if not nb:
            continue
        a = int(codes[v])
        n_a[a - 1] += 1
        s_a[a - 1] += abs(a - Fraction(sum(int(x) for x in nb), len(nb)))
    return n_a, s_a


def auc_pairs(scores, labels):
    """P(s+ > s-) + P(s+ = s-)/2 by enumerating every positive/negative pair."""
    pos = [s for s, y in zip(scores, labels) if y == 1]
    neg = [s for s, y in zip(scores, labels) if y == 0]
    twice = sum(2 if a > b else 1 if a == b else 0 for a in pos for b in neg)
    return twice / (2 * len(pos) * len(neg))


def random_codes(rng, max_shape=(5, 9, 9), max_levels=8):
    p = int(rng.integers(1, max_shape[0] + 1))
    m = int(rng.integers(1, max_shape[1] + 1))
    n = int(rng.integers(1, max_shape[2] + 1))
    levels = int(rng.integers(2, max_levels + 1))
    density = rng.uniform(0.3, 1.0)
    inside = rng.random((p, m, n)) < density
    if not inside.any():
        inside[tuple(rng.integers(0, s) for s in (p, m, n))] = True
    codes = np.where(inside, rng.integers(1, levels + 1, (p, m, n)), 0)
    return codes, levels
