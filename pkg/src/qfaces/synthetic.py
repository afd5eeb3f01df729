"""Desk-scale synthetic paired datasets for demos and verification.

Each class gets distinct smooth base patterns for the visual and thermal
channels (sums of Gaussian bumps at seeded locations). Samples add a small
smooth per-sample perturbation; test pairs are additionally multiplied by
one shared illumination scale per pair, which the quotient construction is
designed to cancel. Images are written as 16-bit PGM files in the layout
``root/<class>/pair##_{visual,thermal}.pgm`` together with a manifest.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .image import save_pgm
from .manifest import Manifest, ManifestEntry, write_manifest

BASE_LO = 0.10
BASE_SPAN = 0.35  # keeps 2x illumination below the [0, 1] clamp


def _bump_pattern(rng: np.random.Generator, shape, n_bumps: int = 3) -> np.ndarray:
    """Smooth positive pattern in [BASE_LO, BASE_LO + BASE_SPAN]."""
    h, w = shape
    ys = np.linspace(0.0, 1.0, h)[:, None]
    xs = np.linspace(0.0, 1.0, w)[None, :]
    acc = np.zeros(shape)
    for _ in range(n_bumps):
        cy, cx = rng.uniform(0.15, 0.85, size=2)
        width = rng.uniform(0.08, 0.25)
        amp = rng.uniform(0.5, 1.0)
        acc += amp * np.exp(-((ys - cy) ** 2 + (xs - cx) ** 2) / (2 * width**2))
    acc -= acc.min()
    peak = acc.max()
    if peak > 0:
        acc /= peak
    return BASE_LO + BASE_SPAN * acc


def generate_synthetic_dataset(
    root,
    n_classes: int = 2,
    pairs_per_class: int = 20,
    train_per_class: int = 12,
    image_size: tuple[int, int] = (80, 100),
    seed: int = 0,
    illum_range: tuple[float, float] = (0.5, 2.0),
    noise_amp: float = 0.02,
) -> Path:
    """Write a synthetic dataset plus manifest; returns the manifest path."""
    if not 1 <= train_per_class < pairs_per_class:
        raise ValueError(
            f"train_per_class must be in [1, {pairs_per_class - 1}], got {train_per_class}"
        )
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    entries = []
    for class_id in range(n_classes):
        class_dir = root / f"{class_id}"
        class_dir.mkdir(exist_ok=True)
        visual_base = _bump_pattern(rng, image_size)
        thermal_base = _bump_pattern(rng, image_size)
        for pair_idx in range(pairs_per_class):
            wobble = noise_amp * (_bump_pattern(rng, image_size) - BASE_LO) / BASE_SPAN
            is_train = pair_idx < train_per_class
            scale = 1.0 if is_train else rng.uniform(*illum_range)
            visual = scale * (visual_base + wobble)
            thermal = scale * (thermal_base + wobble)
            visual_path = class_dir / f"pair{pair_idx:02d}_visual.pgm"
            thermal_path = class_dir / f"pair{pair_idx:02d}_thermal.pgm"
            save_pgm(visual, visual_path, maxval=65535)
            save_pgm(thermal, thermal_path, maxval=65535)
            entries.append(
                ManifestEntry(
                    class_id=class_id,
                    visual_path=visual_path.resolve(),
                    thermal_path=thermal_path.resolve(),
                    split="train" if is_train else "test",
                )
            )
    manifest_path = root / "manifest.csv"
    write_manifest(Manifest(entries), manifest_path, comment=f"synthetic seed={seed}")
    return manifest_path
