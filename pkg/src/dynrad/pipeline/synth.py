"""Seeded phantom series with a class signal that lives only in time.

Each subject gets an ellipsoidal lesion (fixed across timepoints) whose mean
intensity and texture contrast oscillate as

    baseline + amplitude * sin(frequency_c * t + phase)

with ``phase`` drawn uniformly per subject.  Because the phase is uniform,
the intensity at any single timepoint has the same distribution in both
classes; only the rate of change (``frequency_c``) differs.  Setting both
class frequencies equal gives a null benchmark.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import ndimage

from ..errors import ValidationError
from ..volume_io import DTYPES, ManifestEntry, write_manifest, write_volume

log = logging.getLogger(__name__)

_KEYS = {
    "subjectsPerClass": "subjects_per_class",
    "times": "times",
    "dims": "dims",
    "spacing": "spacing",
    "frequencies": "frequencies",
    "baseline": "baseline",
    "amplitude": "amplitude",
    "textureSd": "texture_sd",
    "textureModulation": "texture_modulation",
    "background": "background",
    "noiseSd": "noise_sd",
    "seed": "seed",
    "dtype": "dtype",
}


@dataclass(frozen=True)
class SynthSpec:
    subjects_per_class: int = 20
    times: tuple[float, ...] = (1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0)
    dims: tuple[int, int, int] = (24, 24, 6)  # (rows, cols, slices)
    spacing: tuple[float, float, float] = (1.0, 1.0, 2.0)
    frequencies: tuple[float, float] = (0.3, 1.5)  # rad per time unit, class 0 and class 1
    baseline: float = 100.0
    amplitude: float = 25.0
    texture_sd: float = 8.0
    texture_modulation: float = 0.5
    background: float = 20.0
    noise_sd: float = 2.0
    seed: int = 0
    dtype: str = "f32"

    def __post_init__(self):
        object.__setattr__(self, "times", tuple(float(t) for t in self.times))
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        object.__setattr__(self, "spacing", tuple(float(s) for s in self.spacing))
        object.__setattr__(self, "frequencies", tuple(float(f) for f in self.frequencies))
        if self.subjects_per_class < 1:
            raise ValidationError("subjectsPerClass must be >= 1")
        if len(self.times) < 2 or any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise ValidationError("times must hold at least 2 strictly increasing values")
        if len(self.dims) != 3 or min(self.dims) < 1 or min(self.dims[:2]) < 8:
            raise ValidationError("dims must be (rows >= 8, cols >= 8, slices >= 1)")
        if len(self.spacing) != 3 or min(self.spacing) <= 0:
            raise ValidationError("spacing must be three positive values")
        if len(self.frequencies) != 2:
            raise ValidationError("frequencies must give one value per class")
        if self.noise_sd < 0 or self.texture_sd < 0:
            raise ValidationError("noiseSd and textureSd must be >= 0")
        if self.dtype not in DTYPES:
            raise ValidationError(f"unsupported dtype {self.dtype!r}")

    @classmethod
    def from_dict(cls, data: dict) -> "SynthSpec":
        if not isinstance(data, dict):
            raise ValidationError("synth spec must be a JSON object")
        unknown = sorted(set(data) - set(_KEYS))
        if unknown:
            raise ValidationError(f"unknown synth spec keys {unknown}")
        try:
            return cls(**{_KEYS[k]: v for k, v in data.items()})
        except (TypeError, ValueError) as exc:
            raise ValidationError(f"bad synth spec value: {exc}") from None

    @classmethod
    def load(cls, path) -> "SynthSpec":
        try:
            return cls.from_dict(json.loads(Path(path).read_text()))
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"cannot read synth spec {path}: {exc}") from None

    def to_dict(self) -> dict:
        return {k: (list(v) if isinstance(v, tuple) else v)
                for k, v in ((k, getattr(self, a)) for k, a in _KEYS.items())}


def _lesion_mask(rng, dims) -> np.ndarray:
    m, n, p = dims
    centre = np.array([(p - 1) / 2, (m - 1) / 2, (n - 1) / 2]) + rng.uniform(-1.5, 1.5, 3) * [p > 2, 1, 1]
    radii = np.array([max(p / 2.5, 0.6), m * rng.uniform(0.18, 0.3), n * rng.uniform(0.18, 0.3)])
    zz, yy, xx = np.meshgrid(np.arange(p), np.arange(m), np.arange(n), indexing="ij")
    d = ((zz - centre[0]) / radii[0]) ** 2 + ((yy - centre[1]) / radii[1]) ** 2 + ((xx - centre[2]) / radii[2]) ** 2
    mask = d <= 1.0
    if not mask.any():
        mask[p // 2, m // 2, n // 2] = True
    return mask


def _texture(rng, shape) -> np.ndarray:
    field = ndimage.gaussian_filter(rng.standard_normal(shape), sigma=(0.5, 1.2, 1.2), mode="wrap")
    return (field - field.mean()) / (field.std() or 1.0)


def subject_series(spec: SynthSpec, label: int, rng) -> tuple[np.ndarray, list[np.ndarray]]:
    """(mask, volumes) for one subject, arrays shaped (slices, rows, cols)."""
    m, n, p = spec.dims
    mask = _lesion_mask(rng, spec.dims)
    texture = _texture(rng, (p, m, n))
    omega = spec.frequencies[label]
    phase, tex_phase = rng.uniform(0.0, 2 * np.pi, 2)
    volumes = []
    for t in spec.times:
        level = spec.baseline + spec.amplitude * np.sin(omega * t + phase)
        contrast = spec.texture_sd * (1.0 + spec.texture_modulation * np.sin(omega * t + tex_phase))
        vol = np.where(mask, level + contrast * texture, spec.background)
        vol = vol + spec.noise_sd * rng.standard_normal(vol.shape)
        volumes.append(vol)
    return mask, volumes


def generate(spec: SynthSpec, out_dir) -> Path:
    """Write volumes, masks and ``manifest.json`` under ``out_dir``; returns the manifest path."""
    out = Path(out_dir)
    children = np.random.SeedSequence(spec.seed).spawn(2 * spec.subjects_per_class)
    entries = []
    for i, child in enumerate(children):
        label = i % 2
        sid = f"sub-{i:03d}"
        rng = np.random.default_rng(child)
        mask, volumes = subject_series(spec, label, rng)
        sdir = out / sid
        mask_path = sdir / "mask.json"
        write_volume(mask_path, mask.astype(np.uint8), spec.spacing, "u8")
        tps = []
        for j, (t, vol) in enumerate(zip(spec.times, volumes)):
            vol_path = sdir / f"t{j:02d}.json"
            write_volume(vol_path, vol, spec.spacing, spec.dtype)
            tps.append((t, vol_path, mask_path))
        entries.append(ManifestEntry(sid, label, tuple(tps)))
    manifest = out / "manifest.json"
    write_manifest(manifest, entries)
    log.info("wrote %d subjects x %d timepoints to %s", len(entries), len(spec.times), out)
    return manifest
