"""Command line interface.

Subcommands: decompose (debug subband dump), quotient (export a quotient
image), gen-manifest (seeded split over a class-per-directory tree),
train, evaluate, and pipeline (train + evaluate in one run).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import PipelineConfig, apply_env_overrides, format_config, load_config, parse_config
from .image import load_pgm, normalize_minmax, save_pgm
from .manifest import generate_manifest, load_manifest, write_manifest
from .modelio import load_model, save_model
from .pipeline import emit_report, run_evaluate, run_train
from .quotient import QuotientConfig, quotient_method1, quotient_method2
from .wavelet import dwt2, tile_subbands


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qfaces",
        description="Quotient-based visual/thermal face fusion with PCA + MLP recognition",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decompose", help="dump one-level wavelet subbands as PGM files")
    p.add_argument("image", type=Path)
    p.add_argument("--out", type=Path, required=True, help="output directory")

    p = sub.add_parser("quotient", help="write the quotient image of a visual/thermal pair")
    p.add_argument("visual", type=Path)
    p.add_argument("thermal", type=Path)
    p.add_argument("--method", type=int, choices=(1, 2), required=True)
    p.add_argument("--out", type=Path, required=True, help="output PGM path")
    p.add_argument("--epsilon-rel", type=float, default=1e-3)
    p.add_argument("--fusion", choices=("none", "select", "sum"), default="none")

    p = sub.add_parser("gen-manifest", help="scan a class-per-directory tree into a manifest")
    p.add_argument("root", type=Path)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--train-frac", type=float, default=0.5)
    p.add_argument("--out", type=Path, default=None, help="manifest path (default: stdout)")

    p = sub.add_parser("train", help="train models from a manifest")
    p.add_argument("--manifest", type=Path, required=True)
    p.add_argument("--config", type=Path, default=None, help="key=value config file")
    p.add_argument("--out", type=Path, required=True, help="model file (.qf)")

    p = sub.add_parser("evaluate", help="evaluate a saved model on a manifest's test split")
    p.add_argument("--manifest", type=Path, required=True)
    p.add_argument("--model", type=Path, required=True)
    p.add_argument("--report", choices=("text", "csv"), default="text")
    p.add_argument("--out", type=Path, default=None, help="report path (default: stdout)")

    p = sub.add_parser("pipeline", help="train then evaluate in one run")
    p.add_argument("--manifest", type=Path, required=True)
    p.add_argument("--config", type=Path, default=None)
    p.add_argument("--model-out", type=Path, default=None, help="optionally save the model")
    p.add_argument("--report", choices=("text", "csv"), default="text")
    p.add_argument("--out", type=Path, default=None, help="report path (default: stdout)")
    return parser


def _load_pipeline_config(path: Path | None) -> PipelineConfig:
    cfg = load_config(path) if path else PipelineConfig()
    return apply_env_overrides(cfg)


def _cmd_decompose(args) -> int:
    image = load_pgm(args.image)
    subbands = dwt2(image)
    args.out.mkdir(parents=True, exist_ok=True)
    for name, band in zip(("ca", "ch", "cv", "cd"), subbands.bands()):
        save_pgm(normalize_minmax(band), args.out / f"{name}.pgm")
    save_pgm(normalize_minmax(tile_subbands(subbands)), args.out / "tiled.pgm")
    print(f"wrote ca/ch/cv/cd and tiled PGMs to {args.out}")
    return 0


def _cmd_quotient(args) -> int:
    visual = load_pgm(args.visual)
    thermal = load_pgm(args.thermal)
    cfg = QuotientConfig(method=args.method, epsilon_rel=args.epsilon_rel)
    fn = quotient_method1 if args.method == 1 else quotient_method2
    q = fn(visual, thermal, cfg, fusion=args.fusion)
    save_pgm(normalize_minmax(q), args.out)
    print(f"wrote {q.shape[0]}x{q.shape[1]} quotient image to {args.out}")
    return 0


def _cmd_gen_manifest(args) -> int:
    manifest = generate_manifest(args.root, seed=args.seed, train_frac=args.train_frac)
    if args.out is None:
        from .manifest import EXPECTED_HEADER

        print(",".join(EXPECTED_HEADER))
        for e in manifest.entries:
            print(f"{e.class_id},{e.visual_path},{e.thermal_path},{e.split}")
    else:
        write_manifest(manifest, args.out,
                       comment=f"generated seed={args.seed} train_frac={args.train_frac}")
        print(f"wrote {len(manifest.entries)} entries to {args.out}")
    return 0


def _cmd_train(args) -> int:
    config = _load_pipeline_config(args.config)
    manifest = load_manifest(args.manifest)
    eigen, mlp, summary = run_train(manifest, config)
    save_model(args.out, eigen, mlp, summary.class_ids, format_config(config))
    print(
        f"trained on {summary.n_train} pairs, {len(summary.class_ids)} classes: "
        f"k={summary.n_components}, {summary.epochs} epochs, "
        f"final MSE {summary.final_mse:.6f}; model saved to {args.out}"
    )
    return 0


def _cmd_evaluate(args) -> int:
    eigen, mlp, class_ids, config_text = load_model(args.model)
    config = apply_env_overrides(parse_config(config_text))
    manifest = load_manifest(args.manifest)
    report = run_evaluate(manifest, config, eigen, mlp, class_ids)
    rendered = emit_report(report, fmt=args.report, path=args.out)
    if args.out is None:
        sys.stdout.write(rendered)
    else:
        print(f"wrote report to {args.out}")
    return 0


def _cmd_pipeline(args) -> int:
    config = _load_pipeline_config(args.config)
    manifest = load_manifest(args.manifest)
    eigen, mlp, summary = run_train(manifest, config)
    if args.model_out is not None:
        save_model(args.model_out, eigen, mlp, summary.class_ids, format_config(config))
    report = run_evaluate(manifest, config, eigen, mlp, summary.class_ids)
    rendered = emit_report(report, fmt=args.report, path=args.out)
    if args.out is None:
        sys.stdout.write(rendered)
    else:
        print(f"wrote report to {args.out}")
    return 0


_COMMANDS = {
    "decompose": _cmd_decompose,
    "quotient": _cmd_quotient,
    "gen-manifest": _cmd_gen_manifest,
    "train": _cmd_train,
    "evaluate": _cmd_evaluate,
    "pipeline": _cmd_pipeline,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
