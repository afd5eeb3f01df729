"""Manifest, config, persistence, report and CLI tests."""

import numpy as np
import pytest

from qfaces.cli import main as cli_main
from qfaces.config import (
    PipelineConfig,
    apply_env_overrides,
    format_config,
    load_config,
    parse_config,
)
from qfaces.manifest import Manifest, ManifestError, generate_manifest, load_manifest, write_manifest
from qfaces.mlp import TrainConfig
from qfaces.modelio import (
    ModelCorruptionError,
    ModelFormatError,
    load_model,
    save_model,
)
from qfaces.pipeline import (
    assemble_report,
    emit_report,
    recognition_rate,
    run_evaluate,
    run_train,
)
from qfaces.synthetic import generate_synthetic_dataset


@pytest.fixture(scope="module")
def synthetic_run(tmp_path_factory):
    """One trained pipeline over a small synthetic dataset, shared read-only."""
    root = tmp_path_factory.mktemp("synth")
    manifest_path = generate_synthetic_dataset(
        root, n_classes=2, pairs_per_class=8, train_per_class=5,
        image_size=(16, 20), seed=3,
    )
    manifest = load_manifest(manifest_path)
    config = PipelineConfig(height=16, width=20, train=TrainConfig(max_epochs=300, seed=3))
    eigen, mlp, summary = run_train(manifest, config)
    return manifest, config, eigen, mlp, summary


class TestRecognitionRate:
    @pytest.mark.parametrize(
        "tested,recognized,expected",
        [(20, 17, 85), (33, 33, 100), (33, 32, 97), (33, 30, 91),
         (22, 20, 91), (11, 8, 73), (11, 9, 82), (5, 0, 0)],
    )
    def test_values(self, tested, recognized, expected):
        assert recognition_rate(tested, recognized) == expected

    def test_half_rounds_away_from_zero(self):
        assert recognition_rate(8, 1) == 13  # 12.5 -> 13

    def test_zero_tested_rejected(self):
        with pytest.raises(ValueError, match="tested"):
            recognition_rate(0, 0)

    def test_recognized_bounded(self):
        with pytest.raises(ValueError):
            recognition_rate(5, 6)


class TestReport:
    def test_assemble_averages(self):
        report = assemble_report([(1, 33, 32), (2, 33, 30), (3, 22, 20)])
        assert [r.rate_percent for r in report.rows] == [97, 91, 91]
        assert report.average_rate_percent == 93   # mean(97,91,91)=93
        assert report.weighted_rate_percent == 93  # 82/88 -> 93.18 -> 93

    def test_csv_line_count(self):
        report = assemble_report([(0, 8, 8), (1, 8, 7)])
        rendered = emit_report(report, fmt="csv")
        lines = rendered.strip().split("\n")
        assert len(lines) == 4
        assert lines[0] == "class_id,tested,recognized,rate_percent"
        assert lines[1] == "0,8,8,100"
        assert lines[2] == "1,8,7,88"
        assert lines[3].startswith("average")

    def test_text_table(self):
        report = assemble_report([(0, 10, 9)])
        text = emit_report(report, fmt="text")
        assert "Class" in text and "90%" in text and "Average" in text

    def test_integer_percent_not_fraction(self):
        rendered = emit_report(assemble_report([(0, 33, 30)]), fmt="csv")
        assert ",91" in rendered and "90.9" not in rendered

    def test_write_to_path(self, tmp_path):
        out = tmp_path / "r.csv"
        emit_report(assemble_report([(0, 4, 4)]), fmt="csv", path=out)
        assert out.read_text().startswith("class_id")

    def test_unknown_format(self):
        with pytest.raises(ValueError, match="format"):
            emit_report(assemble_report([(0, 1, 1)]), fmt="json")


def write_pair(tmp_path, stem):
    visual = tmp_path / f"{stem}_visual.pgm"
    thermal = tmp_path / f"{stem}_thermal.pgm"
    visual.write_bytes(b"P5\n4 4\n255\n" + bytes(range(16)))
    thermal.write_bytes(b"P5\n4 4\n255\n" + bytes(range(16, 32)))
    return visual, thermal


class TestManifest:
    def test_valid_round_trip(self, tmp_path):
        v, t = write_pair(tmp_path, "a")
        path = tmp_path / "m.csv"
        path.write_text(
            "class_id,visual_path,thermal_path,split\n"
            f"0,{v.name},{t.name},train\n"
            f"0,{v.name},{t.name},test\n"
        )
        manifest = load_manifest(path)
        assert len(manifest.train_entries) == 1
        assert len(manifest.test_entries) == 1
        assert manifest.entries[0].visual_path.is_absolute()

    def test_comments_and_blank_lines(self, tmp_path):
        v, t = write_pair(tmp_path, "a")
        path = tmp_path / "m.csv"
        path.write_text(
            "# heading comment\n\nclass_id,visual_path,thermal_path,split\n"
            f"0,{v.name},{t.name},train\n"
        )
        assert len(load_manifest(path).entries) == 1

    def test_test_class_missing_from_train(self, tmp_path):
        v, t = write_pair(tmp_path, "a")
        path = tmp_path / "m.csv"
        path.write_text(
            "class_id,visual_path,thermal_path,split\n"
            f"0,{v.name},{t.name},train\n"
            f"1,{v.name},{t.name},test\n"
        )
        with pytest.raises(ManifestError, match="absent from train"):
            load_manifest(path)

    def test_field_count_error_names_line(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text(
            "class_id,visual_path,thermal_path,split\n0,a.pgm,train\n"
        )
        with pytest.raises(ManifestError, match=":2"):
            load_manifest(path)

    def test_missing_file_reported(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text(
            "class_id,visual_path,thermal_path,split\n0,gone.pgm,gone2.pgm,train\n"
        )
        with pytest.raises(ManifestError, match="missing file"):
            load_manifest(path)

    def test_bad_header(self, tmp_path):
        path = tmp_path / "m.csv"
        path.write_text("class,vis,thermo,split\n")
        with pytest.raises(ManifestError, match="header"):
            load_manifest(path)

    def test_bad_split_value(self, tmp_path):
        v, t = write_pair(tmp_path, "a")
        path = tmp_path / "m.csv"
        path.write_text(
            "class_id,visual_path,thermal_path,split\n"
            f"0,{v.name},{t.name},validation\n"
        )
        with pytest.raises(ManifestError, match="split"):
            load_manifest(path)

    def test_generate_manifest_split(self, tmp_path):
        for cls in ("0", "1"):
            d = tmp_path / cls
            d.mkdir()
            for i in range(6):
                write_pair(d, f"p{i}")
        manifest = generate_manifest(tmp_path, seed=1, train_frac=0.5)
        assert len(manifest.entries) == 12
        for cls in (0, 1):
            train = [e for e in manifest.train_entries if e.class_id == cls]
            assert len(train) == 3

    def test_generate_manifest_deterministic(self, tmp_path):
        d = tmp_path / "0"
        d.mkdir()
        (tmp_path / "1").mkdir()
        for i in range(4):
            write_pair(d, f"p{i}")
            write_pair(tmp_path / "1", f"p{i}")
        a = generate_manifest(tmp_path, seed=5, train_frac=0.5)
        b = generate_manifest(tmp_path, seed=5, train_frac=0.5)
        assert a.entries == b.entries

    def test_generate_manifest_missing_partner(self, tmp_path):
        d = tmp_path / "0"
        d.mkdir()
        (d / "x_visual.pgm").write_bytes(b"P5\n1 1\n255\n\x00")
        with pytest.raises(ManifestError, match="thermal partner"):
            generate_manifest(tmp_path)

    def test_write_then_load(self, tmp_path):
        v, t = write_pair(tmp_path, "a")
        manifest = load_manifest_from_entries(tmp_path, v, t)
        out = tmp_path / "written.csv"
        write_manifest(manifest, out, comment="regression")
        again = load_manifest(out)
        assert again.entries == manifest.entries


def load_manifest_from_entries(tmp_path, v, t):
    path = tmp_path / "tmp_manifest.csv"
    path.write_text(
        "class_id,visual_path,thermal_path,split\n"
        f"0,{v},{t},train\n"
        f"0,{v},{t},test\n"
    )
    return load_manifest(path)


class TestConfig:
    def test_defaults(self):
        cfg = PipelineConfig()
        assert (cfg.height, cfg.width) == (80, 100)
        assert cfg.method == 2
        assert cfg.k_max == 40
        assert cfg.train.learning_rate == 0.1
        assert cfg.train.momentum == 0.9
        assert cfg.feature_shape == (40, 50)

    def test_round_trip(self):
        cfg = PipelineConfig(
            height=16, width=20, crop=(1, 2, 14, 18), method=1,
            epsilon_rel=5e-3, fusion_variant="select", k_max=10,
            hidden_sizes=(30, 10),
            train=TrainConfig(learning_rate=0.05, momentum=0.5, max_epochs=77,
                              target_mse=1e-4, seed=9, shuffle=True),
        )
        again = parse_config(format_config(cfg))
        assert again == cfg

    def test_parse_defaults_from_empty(self):
        assert parse_config("") == PipelineConfig()

    def test_unknown_key_rejected(self):
        with pytest.raises(ValueError, match="unknown"):
            parse_config("bogus=1\n")

    def test_method2_divisibility_enforced(self):
        with pytest.raises(ValueError, match="divisible by 4"):
            PipelineConfig(height=82, width=100, method=2)

    def test_odd_size_rejected_for_method1(self):
        with pytest.raises(ValueError, match="even"):
            PipelineConfig(height=81, width=100, method=1)

    def test_env_seed_override(self, monkeypatch):
        monkeypatch.setenv("QF_SEED", "4242")
        cfg = apply_env_overrides(PipelineConfig())
        assert cfg.train.seed == 4242

    def test_env_seed_invalid(self, monkeypatch):
        monkeypatch.setenv("QF_SEED", "not-a-number")
        with pytest.raises(ValueError, match="QF_SEED"):
            apply_env_overrides(PipelineConfig())

    def test_load_config_file(self, tmp_path):
        path = tmp_path / "c.cfg"
        path.write_text("# comment\nheight=16\nwidth=20\nseed=7\n")
        cfg = load_config(path)
        assert cfg.height == 16 and cfg.train.seed == 7


class TestRunTrainEvaluate:
    def test_stage_order(self, synthetic_run):
        manifest, config, *_ = synthetic_run
        stages = []
        run_train(manifest, config, trace=stages.append)
        assert stages == ["quotient", "pca", "mlp"]

    def test_feature_dimension_method2(self, synthetic_run):
        _, config, eigen, _, summary = synthetic_run
        assert eigen.d == (config.height // 2) * (config.width // 2)
        assert summary.n_features == eigen.d

    def test_evaluation_reports_each_class(self, synthetic_run):
        manifest, config, eigen, mlp, summary = synthetic_run
        report = run_evaluate(manifest, config, eigen, mlp, summary.class_ids)
        assert [r.class_id for r in report.rows] == [0, 1]
        assert all(r.tested == 3 for r in report.rows)

    def test_single_class_rejected(self, tmp_path):
        v, t = write_pair(tmp_path, "a")
        path = tmp_path / "m.csv"
        path.write_text(
            "class_id,visual_path,thermal_path,split\n"
            f"0,{v.name},{t.name},train\n"
            f"0,{v.name},{t.name},train\n"
        )
        manifest = load_manifest(path)
        with pytest.raises(ValueError, match="classes"):
            run_train(manifest, PipelineConfig(height=4, width=4))

    def test_deterministic_reports(self, synthetic_run):
        manifest, config, *_ = synthetic_run
        reports = []
        for _ in range(2):
            eigen, mlp, summary = run_train(manifest, config)
            reports.append(run_evaluate(manifest, config, eigen, mlp, summary.class_ids))
        assert reports[0] == reports[1]

    def test_model_dimension_mismatch_detected(self, synthetic_run):
        manifest, config, eigen, mlp, summary = synthetic_run
        wrong = PipelineConfig(height=32, width=40,
                               train=TrainConfig(max_epochs=1))
        with pytest.raises(ValueError, match="does not match"):
            run_evaluate(manifest, wrong, eigen, mlp, summary.class_ids)

    def test_no_test_entries_rejected(self, synthetic_run):
        manifest, config, eigen, mlp, summary = synthetic_run
        train_only = Manifest(entries=list(manifest.train_entries))
        with pytest.raises(ValueError, match="no test entries"):
            run_evaluate(train_only, config, eigen, mlp, summary.class_ids)

    def test_empty_report_rejected(self):
        with pytest.raises(ValueError, match="at least one class"):
            assemble_report([])


class TestModelFile:
    def test_round_trip_bitwise(self, synthetic_run, tmp_path):
        _, config, eigen, mlp, summary = synthetic_run
        path = tmp_path / "m.qf"
        save_model(path, eigen, mlp, summary.class_ids, format_config(config))
        eigen2, mlp2, class_ids2, config_text = load_model(path)
        assert np.array_equal(eigen.mean, eigen2.mean)
        assert np.array_equal(eigen.basis, eigen2.basis)
        assert np.array_equal(eigen.eigenvalues, eigen2.eigenvalues)
        assert eigen.image_shape == eigen2.image_shape
        assert mlp.layer_sizes == mlp2.layer_sizes
        for a, b in zip(mlp.weights, mlp2.weights):
            assert np.array_equal(a, b)
        for a, b in zip(mlp.biases, mlp2.biases):
            assert np.array_equal(a, b)
        assert tuple(class_ids2) == summary.class_ids
        assert parse_config(config_text) == config

    def test_wrong_magic(self, tmp_path):
        path = tmp_path / "m.qf"
        path.write_bytes(b"NOPE" + bytes(64))
        with pytest.raises(ModelFormatError, match="not a qfaces model"):
            load_model(path)

    def test_version_mismatch(self, synthetic_run, tmp_path):
        import struct
        import zlib

        _, config, eigen, mlp, summary = synthetic_run
        path = tmp_path / "m.qf"
        save_model(path, eigen, mlp, summary.class_ids, format_config(config))
        data = bytearray(path.read_bytes())
        data[4] = 99  # future format version, checksum recomputed to stay valid
        data[-4:] = struct.pack("<I", zlib.crc32(bytes(data[:-4])) & 0xFFFFFFFF)
        path.write_bytes(bytes(data))
        with pytest.raises(ModelFormatError, match="version"):
            load_model(path)

    def test_truncated_file(self, synthetic_run, tmp_path):
        _, config, eigen, mlp, summary = synthetic_run
        path = tmp_path / "m.qf"
        save_model(path, eigen, mlp, summary.class_ids, format_config(config))
        data = path.read_bytes()
        path.write_bytes(data[: len(data) // 2])
        with pytest.raises(ModelCorruptionError):
            load_model(path)

    def test_bitflip_detected(self, synthetic_run, tmp_path):
        _, config, eigen, mlp, summary = synthetic_run
        path = tmp_path / "m.qf"
        save_model(path, eigen, mlp, summary.class_ids, format_config(config))
        data = bytearray(path.read_bytes())
        data[len(data) // 2] ^= 0xFF
        path.write_bytes(bytes(data))
        with pytest.raises(ModelCorruptionError, match="checksum"):
            load_model(path)


class TestCli:
    def test_decompose_and_quotient(self, tmp_path, capsys):
        from qfaces.image import save_pgm

        rng = np.random.default_rng(80)
        visual = tmp_path / "v.pgm"
        thermal = tmp_path / "t.pgm"
        save_pgm(0.2 + 0.6 * rng.random((16, 20)), visual, maxval=65535)
        save_pgm(0.2 + 0.6 * rng.random((16, 20)), thermal, maxval=65535)

        out_dir = tmp_path / "bands"
        assert cli_main(["decompose", str(visual), "--out", str(out_dir)]) == 0
        for name in ("ca", "ch", "cv", "cd", "tiled"):
            assert (out_dir / f"{name}.pgm").is_file()

        out_pgm = tmp_path / "q.pgm"
        code = cli_main([
            "quotient", str(visual), str(thermal),
            "--method", "2", "--out", str(out_pgm),
        ])
        assert code == 0
        from qfaces.image import load_pgm

        assert load_pgm(out_pgm).shape == (8, 10)

    def test_gen_manifest_cli(self, tmp_path, capsys):
        for cls in ("0", "1"):
            d = tmp_path / "data" / cls
            d.mkdir(parents=True)
            for i in range(4):
                write_pair(d, f"p{i}")
        out = tmp_path / "m.csv"
        code = cli_main([
            "gen-manifest", str(tmp_path / "data"),
            "--seed", "2", "--train-frac", "0.5", "--out", str(out),
        ])
        assert code == 0
        manifest = load_manifest(out)
        assert len(manifest.entries) == 8  # 2 classes x 4 pairs
        assert len(manifest.train_entries) == 4

    def test_train_evaluate_pipeline_commands(self, tmp_path, capsys, monkeypatch):
        manifest_path = generate_synthetic_dataset(
            tmp_path / "data", n_classes=2, pairs_per_class=6, train_per_class=4,
            image_size=(16, 20), seed=8,
        )
        config_path = tmp_path / "run.cfg"
        config_path.write_text("height=16\nwidth=20\nmax_epochs=300\nseed=8\n")
        model_path = tmp_path / "model.qf"

        code = cli_main([
            "train", "--manifest", str(manifest_path),
            "--config", str(config_path), "--out", str(model_path),
        ])
        assert code == 0
        assert model_path.is_file()

        report_path = tmp_path / "report.csv"
        code = cli_main([
            "evaluate", "--manifest", str(manifest_path),
            "--model", str(model_path), "--report", "csv",
            "--out", str(report_path),
        ])
        assert code == 0
        lines = report_path.read_text().strip().split("\n")
        assert len(lines) == 4  # header + 2 classes + average

        code = cli_main([
            "pipeline", "--manifest", str(manifest_path),
            "--config", str(config_path), "--report", "text",
        ])
        assert code == 0
        assert "Average" in capsys.readouterr().out

    def test_env_seed_reaches_training(self, tmp_path, monkeypatch, capsys):
        manifest_path = generate_synthetic_dataset(
            tmp_path / "data", n_classes=2, pairs_per_class=4, train_per_class=3,
            image_size=(16, 20), seed=9,
        )
        config_path = tmp_path / "run.cfg"
        config_path.write_text("height=16\nwidth=20\nmax_epochs=50\nseed=1\n")
        model_path = tmp_path / "model.qf"
        monkeypatch.setenv("QF_SEED", "777")
        code = cli_main([
            "train", "--manifest", str(manifest_path),
            "--config", str(config_path), "--out", str(model_path),
        ])
        assert code == 0
        _, _, _, config_text = load_model(model_path)
        assert "seed=777" in config_text

    def test_cli_error_path(self, tmp_path, capsys):
        code = cli_main(["decompose", str(tmp_path / "missing.pgm"),
                         "--out", str(tmp_path / "o")])
        assert code == 1
        assert "error:" in capsys.readouterr().err
