"""Dataset manifests: the single ingestion point for paired image files.

A manifest is a UTF-8 CSV with header ``class_id,visual_path,thermal_path,
split``; lines starting with ``#`` are comments. Relative paths resolve
against the manifest's own directory. Every class present in the test
split must also appear in the train split, and all referenced files must
exist at load time.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

EXPECTED_HEADER = ["class_id", "visual_path", "thermal_path", "split"]
SPLITS = ("train", "test")


class ManifestError(ValueError):
    """Manifest parse or validation failure."""


@dataclass(frozen=True)
class ManifestEntry:
    class_id: int
    visual_path: Path
    thermal_path: Path
    split: str


@dataclass
class Manifest:
    entries: list[ManifestEntry]
    class_names: dict[int, str] = field(default_factory=dict)

    @property
    def train_entries(self) -> list[ManifestEntry]:
        return [e for e in self.entries if e.split == "train"]

    @property
    def test_entries(self) -> list[ManifestEntry]:
        return [e for e in self.entries if e.split == "test"]

    def class_ids(self) -> list[int]:
        return sorted({e.class_id for e in self.entries})


def load_manifest(path, check_files: bool = True) -> Manifest:
    """Parse and validate a manifest CSV."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"manifest not found: {path}")
    base = path.parent

    numbered = []
    with path.open(encoding="utf-8", newline="") as fh:
        for lineno, raw in enumerate(fh, start=1):
            stripped = raw.strip()
            if not stripped or stripped.startswith("#"):
                continue
            numbered.append((lineno, raw))
    if not numbered:
        raise ManifestError(f"{path}: empty manifest")

    header_line, header_raw = numbered[0]
    header = next(csv.reader([header_raw]))
    if [h.strip() for h in header] != EXPECTED_HEADER:
        raise ManifestError(
            f"{path}:{header_line}: expected header "
            f"{','.join(EXPECTED_HEADER)}, got {header_raw.strip()!r}"
        )

    entries = []
    for lineno, raw in numbered[1:]:
        fields = next(csv.reader([raw]))
        if len(fields) != 4:
            raise ManifestError(
                f"{path}:{lineno}: expected 4 fields, got {len(fields)}"
            )
        cls_text, visual, thermal, split = (f.strip() for f in fields)
        try:
            class_id = int(cls_text)
        except ValueError:
            raise ManifestError(
                f"{path}:{lineno}: class_id must be an integer, got {cls_text!r}"
            ) from None
        if class_id < 0:
            raise ManifestError(f"{path}:{lineno}: class_id must be non-negative")
        if split not in SPLITS:
            raise ManifestError(
                f"{path}:{lineno}: split must be 'train' or 'test', got {split!r}"
            )
        visual_path = (base / visual).resolve() if not Path(visual).is_absolute() else Path(visual)
        thermal_path = (base / thermal).resolve() if not Path(thermal).is_absolute() else Path(thermal)
        if check_files:
            for p in (visual_path, thermal_path):
                if not p.is_file():
                    raise ManifestError(f"{path}:{lineno}: missing file {p}")
        entries.append(ManifestEntry(class_id, visual_path, thermal_path, split))

    train_classes = {e.class_id for e in entries if e.split == "train"}
    test_classes = {e.class_id for e in entries if e.split == "test"}
    orphans = sorted(test_classes - train_classes)
    if orphans:
        raise ManifestError(
            f"{path}: test classes absent from train split: {orphans}"
        )
    return Manifest(entries)


def write_manifest(manifest: Manifest, path, comment: str | None = None) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        writer = csv.writer(fh)
        writer.writerow(EXPECTED_HEADER)
        for e in manifest.entries:
            writer.writerow([e.class_id, str(e.visual_path), str(e.thermal_path), e.split])


def generate_manifest(root, seed: int = 0, train_frac: float = 0.5) -> Manifest:
    """Scan a class-per-directory tree and draw a seeded train/test split.

    Each subdirectory of ``root`` is one class (its name is the class id if
    numeric, else ids are assigned in sorted order). Visual files are those
    whose stem contains ``visual``; the thermal partner is the same name
    with ``visual`` replaced by ``thermal``. Every class keeps at least one
    training pair.
    """
    root = Path(root)
    if not root.is_dir():
        raise FileNotFoundError(f"dataset root not found: {root}")
    if not 0 < train_frac < 1:
        raise ValueError(f"train_frac must be in (0, 1), got {train_frac}")

    class_dirs = sorted(p for p in root.iterdir() if p.is_dir())
    if not class_dirs:
        raise ManifestError(f"no class directories under {root}")

    all_numeric = all(d.name.isdigit() for d in class_dirs)
    rng = np.random.default_rng(seed)
    entries = []
    class_names = {}
    for index, class_dir in enumerate(class_dirs):
        class_id = int(class_dir.name) if all_numeric else index
        class_names[class_id] = class_dir.name
        visuals = sorted(
            p for p in class_dir.iterdir()
            if p.is_file() and "visual" in p.name and p.suffix.lower() == ".pgm"
        )
        if not visuals:
            raise ManifestError(f"no '*visual*.pgm' files in {class_dir}")
        pairs = []
        for visual in visuals:
            thermal = visual.with_name(visual.name.replace("visual", "thermal", 1))
            if not thermal.is_file():
                raise ManifestError(f"missing thermal partner for {visual}")
            pairs.append((visual, thermal))
        order = rng.permutation(len(pairs))
        n_train = max(1, int(round(train_frac * len(pairs))))
        for rank, idx in enumerate(order):
            split = "train" if rank < n_train else "test"
            visual, thermal = pairs[idx]
            entries.append(ManifestEntry(class_id, visual, thermal, split))

    entries.sort(key=lambda e: (e.class_id, e.split, str(e.visual_path)))
    return Manifest(entries, class_names)
