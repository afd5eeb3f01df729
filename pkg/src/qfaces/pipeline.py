"""End-to-end orchestration: preprocess, train, evaluate, report.

Training runs the stages in fixed order: quotient feature generation over
the train split, PCA fit and projection, then MLP training. Evaluation
repeats the preprocessing on the test split, projects into the trained
eigenspace, predicts with the trained network and tallies per-class
counts into a recognition report. Everything is deterministic for a given
manifest, config and seed.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import PipelineConfig
from .eigenspace import EigenModel, fit_pca_matrix, project
from .image import crop, load_pgm, normalize_minmax, resize_bilinear
from .manifest import Manifest, ManifestEntry
from .mlp import MlpModel, init_mlp, predict, train_mlp
from .quotient import quotient_image


@dataclass(frozen=True)
class ClassResult:
    class_id: int
    tested: int
    recognized: int
    rate_percent: int


@dataclass(frozen=True)
class RecognitionReport:
    rows: tuple[ClassResult, ...]
    average_rate_percent: int   # unweighted mean of per-class rates
    weighted_rate_percent: int  # total recognized / total tested

    @property
    def total_tested(self) -> int:
        return sum(r.tested for r in self.rows)

    @property
    def total_recognized(self) -> int:
        return sum(r.recognized for r in self.rows)


@dataclass(frozen=True)
class TrainSummary:
    n_train: int
    n_features: int
    n_components: int
    class_ids: tuple[int, ...]
    epochs: int
    final_mse: float


def recognition_rate(tested: int, recognized: int) -> int:
    """Integer percent, rounded half away from zero (97 for 32/33)."""
    if tested <= 0:
        raise ValueError(f"tested must be positive, got {tested}")
    if not 0 <= recognized <= tested:
        raise ValueError(f"recognized must be in [0, {tested}], got {recognized}")
    return (200 * recognized + tested) // (2 * tested)


def _round_half_up(numerator: int, denominator: int) -> int:
    return (2 * numerator + denominator) // (2 * denominator)


def preprocess_pair(entry: ManifestEntry, config: PipelineConfig) -> np.ndarray:
    """Load, crop, resize and quotient one visual/thermal pair."""
    visual = load_pgm(entry.visual_path)
    thermal = load_pgm(entry.thermal_path)
    if config.crop is not None:
        top, left, h, w = config.crop
        visual = crop(visual, top, left, h, w)
        thermal = crop(thermal, top, left, h, w)
    visual = resize_bilinear(visual, config.height, config.width)
    thermal = resize_bilinear(thermal, config.height, config.width)
    q = quotient_image(visual, thermal, config.quotient, fusion=config.fusion_variant)
    return normalize_minmax(q)


def run_train(manifest: Manifest, config: PipelineConfig, trace=None):
    """Train the eigenspace and classifier on the manifest's train split.

    Returns (EigenModel, MlpModel, TrainSummary). ``trace``, when given, is
    called with each stage name as it starts ("quotient", "pca", "mlp").
    """
    notify = trace or (lambda stage: None)
    entries = manifest.train_entries
    if len(entries) < 2:
        raise ValueError(f"need at least 2 training pairs, got {len(entries)}")
    class_ids = sorted({e.class_id for e in entries})
    if len(class_ids) < 2:
        raise ValueError(f"need at least 2 training classes, got {len(class_ids)}")

    notify("quotient")
    features = [preprocess_pair(e, config) for e in entries]
    feature_shape = features[0].shape

    notify("pca")
    X = np.stack([f.ravel() for f in features])
    eigen = fit_pca_matrix(X, config.k_max, image_shape=feature_shape)
    projected = (X - eigen.mean) @ eigen.basis

    notify("mlp")
    index_of = {cid: i for i, cid in enumerate(class_ids)}
    targets = np.eye(len(class_ids))[[index_of[e.class_id] for e in entries]]
    mlp = init_mlp([eigen.k, *config.hidden_sizes, len(class_ids)],
                   seed=config.train.seed)
    epochs, final_mse = train_mlp(mlp, list(zip(projected, targets)), config.train)

    summary = TrainSummary(
        n_train=len(entries),
        n_features=eigen.d,
        n_components=eigen.k,
        class_ids=tuple(class_ids),
        epochs=epochs,
        final_mse=final_mse,
    )
    return eigen, mlp, summary


def run_evaluate(manifest: Manifest, config: PipelineConfig,
                 eigen: EigenModel, mlp: MlpModel, class_ids) -> RecognitionReport:
    """Classify the manifest's test split and tally per-class recognition."""
    entries = manifest.test_entries
    if not entries:
        raise ValueError("manifest has no test entries")
    class_ids = [int(c) for c in class_ids]
    expected_d = config.feature_shape[0] * config.feature_shape[1]
    if eigen.d != expected_d:
        raise ValueError(
            f"eigen model dimension {eigen.d} does not match configured "
            f"feature size {expected_d}"
        )
    if mlp.n_inputs != eigen.k:
        raise ValueError(
            f"classifier expects {mlp.n_inputs} features, eigen model provides {eigen.k}"
        )
    if mlp.n_outputs != len(class_ids):
        raise ValueError(
            f"classifier has {mlp.n_outputs} outputs for {len(class_ids)} classes"
        )

    tested: dict[int, int] = {}
    recognized: dict[int, int] = {}
    for entry in entries:
        feature = preprocess_pair(entry, config)
        coords = project(eigen, feature)
        predicted = class_ids[predict(mlp, coords)]
        tested[entry.class_id] = tested.get(entry.class_id, 0) + 1
        if predicted == entry.class_id:
            recognized[entry.class_id] = recognized.get(entry.class_id, 0) + 1
    return assemble_report(
        [(cid, tested[cid], recognized.get(cid, 0)) for cid in sorted(tested)]
    )


def assemble_report(counts) -> RecognitionReport:
    """Build a RecognitionReport from (class_id, tested, recognized) triples."""
    rows = tuple(
        ClassResult(cid, t, r, recognition_rate(t, r)) for cid, t, r in counts
    )
    if not rows:
        raise ValueError("report needs at least one class")
    average = _round_half_up(sum(r.rate_percent for r in rows), len(rows))
    weighted = recognition_rate(
        sum(r.tested for r in rows), sum(r.recognized for r in rows)
    )
    return RecognitionReport(rows, average, weighted)


def format_report_text(report: RecognitionReport) -> str:
    out = io.StringIO()
    out.write(f"{'Class':>8}  {'Tested':>6}  {'Recognized':>10}  {'Rate':>5}\n")
    for row in report.rows:
        out.write(
            f"{row.class_id:>8}  {row.tested:>6}  {row.recognized:>10}  "
            f"{row.rate_percent:>4}%\n"
        )
    out.write(f"{'Average':>8}  {'':>6}  {'':>10}  {report.average_rate_percent:>4}%\n")
    return out.getvalue()


def format_report_csv(report: RecognitionReport) -> str:
    lines = ["class_id,tested,recognized,rate_percent"]
    for row in report.rows:
        lines.append(f"{row.class_id},{row.tested},{row.recognized},{row.rate_percent}")
    lines.append(f"average,,,{report.average_rate_percent}")
    return "\n".join(lines) + "\n"


def emit_report(report: RecognitionReport, fmt: str = "text", path=None) -> str:
    """Render the report; write it to ``path`` when given."""
    if fmt == "text":
        rendered = format_report_text(report)
    elif fmt == "csv":
        rendered = format_report_csv(report)
    else:
        raise ValueError(f"format must be 'text' or 'csv', got {fmt!r}")
    if path is not None:
        Path(path).write_text(rendered, encoding="utf-8")
    return rendered
