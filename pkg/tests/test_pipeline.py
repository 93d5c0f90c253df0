"""Sample/dataset orchestration, config parsing, and the CLI."""

import json

import numpy as np
import pytest

from objectaug.augment import CategoryCoefficients, OpKind, OpSpec
from objectaug.cli import main as cli_main
from objectaug.dataset_io import load_sample, write_sample
from objectaug.errors import PairingError, ParseError, ValidationError
from objectaug.fill import FillStrategy, FillVariant
from objectaug.pipeline import (
    PipelineConfig,
    augment_dataset,
    augment_sample,
    augment_sample_with_stats,
    default_ops,
    parse_config,
)

from conftest import corpus_hash, synthetic_sample


def zero_prob_ops():
    return [OpSpec(op.kind, 0.0, op.magnitude) for op in default_ops()]


def degenerate_one_ops():
    # Everything fires, nothing moves: zero magnitudes, flip off.
    return [
        OpSpec(OpKind.SCALE, 1.0, 0.0),
        OpSpec(OpKind.ROTATE, 1.0, 0.0),
        OpSpec(OpKind.SHIFT, 1.0, 0.0),
        OpSpec(OpKind.FLIP_H, 0.0),
        OpSpec(OpKind.BRIGHTNESS, 1.0, 0.0),
    ]


class TestAugmentSample:
    def test_zero_probabilities_identity(self):
        rng = np.random.default_rng(101)
        config = PipelineConfig(ops=zero_prob_ops(), min_area=1)
        for _ in range(5):
            sample = synthetic_sample(rng, with_ignore=True)
            out = augment_sample(sample, config, CategoryCoefficients.uniform(), seed=1)
            assert (out.image == sample.image).all()
            assert (out.mask == sample.mask).all()

    def test_degenerate_full_probability_identity(self):
        rng = np.random.default_rng(103)
        config = PipelineConfig(ops=degenerate_one_ops(), min_area=1)
        for _ in range(5):
            sample = synthetic_sample(rng, with_ignore=True)
            out = augment_sample(sample, config, CategoryCoefficients.uniform(), seed=2)
            assert (out.image == sample.image).all()
            assert (out.mask == sample.mask).all()

    def test_no_foreground_identity(self):
        rng = np.random.default_rng(107)
        image = rng.integers(0, 256, size=(16, 16, 3), dtype=np.uint8)
        mask = np.zeros((16, 16), dtype=np.uint8)
        from objectaug.dataset_io import LabeledSample

        sample = LabeledSample(image, mask, "bg")
        out = augment_sample(sample, PipelineConfig(min_area=1), CategoryCoefficients.uniform(), 3)
        assert (out.image == image).all() and (out.mask == mask).all()

    def test_input_never_mutated(self):
        rng = np.random.default_rng(109)
        sample = synthetic_sample(rng, n_objects=3)
        image_before = sample.image.copy()
        mask_before = sample.mask.copy()
        config = PipelineConfig(min_area=1, fill=FillStrategy.noise())
        augment_sample(sample, config, CategoryCoefficients.uniform(), 7)
        assert (sample.image == image_before).all()
        assert (sample.mask == mask_before).all()

    def test_seed_determinism(self):
        rng = np.random.default_rng(113)
        sample = synthetic_sample(rng, n_objects=4)
        config = PipelineConfig(min_area=1, fill=FillStrategy.noise())
        coeffs = CategoryCoefficients.uniform()
        outs = [augment_sample(sample, config, coeffs, 55) for _ in range(10)]
        for out in outs[1:]:
            assert (out.image == outs[0].image).all()
            assert (out.mask == outs[0].mask).all()

    def test_label_closure(self):
        rng = np.random.default_rng(127)
        ops = [OpSpec(op.kind, 1.0, op.magnitude) for op in default_ops()]
        config = PipelineConfig(ops=ops, min_area=1, fill=FillStrategy.none())
        for trial in range(10):
            sample = synthetic_sample(rng, with_ignore=trial % 2 == 0)
            out = augment_sample(sample, config, CategoryCoefficients.uniform(), trial)
            assert set(np.unique(out.mask)) <= set(np.unique(sample.mask)) | {0}

    def test_allowlist_restricts_categories(self):
        rng = np.random.default_rng(131)
        sample = synthetic_sample(rng, n_objects=5, categories=(1, 2))
        ops = [OpSpec(op.kind, 1.0, op.magnitude) for op in default_ops()]
        config = PipelineConfig(
            ops=ops, min_area=1, fill=FillStrategy.none(), category_allowlist={1}
        )
        _, stats = augment_sample_with_stats(sample, config, CategoryCoefficients.uniform(), 5)
        assert set(stats.per_category) <= {1}

    def test_stats_are_consistent(self):
        rng = np.random.default_rng(137)
        config = PipelineConfig(min_area=1, fill=FillStrategy.none())
        for trial in range(5):
            sample = synthetic_sample(rng, n_objects=4)
            _, stats = augment_sample_with_stats(
                sample, config, CategoryCoefficients.uniform(), trial
            )
            assert stats.objects_augmented + stats.objects_skipped == stats.objects_seen
            assert sum(stats.per_category.values()) == stats.objects_augmented


def _write_corpus(rng, image_dir, mask_dir, count=4, size=48):
    image_dir.mkdir(parents=True, exist_ok=True)
    mask_dir.mkdir(parents=True, exist_ok=True)
    for index in range(count):
        sample = synthetic_sample(
            rng, width=size, height=size, sample_id=f"s{index:03d}"
        )
        staging = image_dir.parent / "staging"
        image_path, mask_path = write_sample(sample, staging)
        (image_dir / image_path.name).write_bytes(image_path.read_bytes())
        (mask_dir / mask_path.name).write_bytes(mask_path.read_bytes())


class TestAugmentDataset:
    def test_empty_input_dir(self, tmp_path):
        (tmp_path / "images").mkdir()
        (tmp_path / "masks").mkdir()
        report = augment_dataset(
            tmp_path / "images", tmp_path / "masks", tmp_path / "out", PipelineConfig()
        )
        assert report.samples_in == 0 and report.samples_out == 0
        assert report.objects_seen == 0

    def test_multiplier_output_count_and_naming(self, tmp_path):
        rng = np.random.default_rng(139)
        _write_corpus(rng, tmp_path / "images", tmp_path / "masks", count=3)
        config = PipelineConfig(min_area=1, multiplier=2, fill=FillStrategy.noise())
        report = augment_dataset(
            tmp_path / "images", tmp_path / "masks", tmp_path / "out", config
        )
        assert report.samples_out == 6
        images = sorted(p.name for p in (tmp_path / "out" / "images").iterdir())
        assert images == sorted(f"s{i:03d}_aug{j}.png" for i in range(3) for j in range(2))
        masks = sorted(p.name for p in (tmp_path / "out" / "masks").iterdir())
        assert masks == images

    def test_repeat_runs_are_byte_identical(self, tmp_path):
        rng = np.random.default_rng(149)
        _write_corpus(rng, tmp_path / "images", tmp_path / "masks", count=3)
        config = PipelineConfig(min_area=1, multiplier=2, seed=9, fill=FillStrategy.noise())
        augment_dataset(tmp_path / "images", tmp_path / "masks", tmp_path / "a", config)
        augment_dataset(tmp_path / "images", tmp_path / "masks", tmp_path / "b", config)
        assert corpus_hash(tmp_path / "a") == corpus_hash(tmp_path / "b")

    def test_worker_count_does_not_change_output(self, tmp_path):
        rng = np.random.default_rng(151)
        _write_corpus(rng, tmp_path / "images", tmp_path / "masks", count=4)
        config = PipelineConfig(min_area=1, seed=4, fill=FillStrategy.noise())
        augment_dataset(tmp_path / "images", tmp_path / "masks", tmp_path / "w1", config, workers=1)
        augment_dataset(tmp_path / "images", tmp_path / "masks", tmp_path / "w8", config, workers=8)
        assert corpus_hash(tmp_path / "w1") == corpus_hash(tmp_path / "w8")

    def test_inputs_not_modified(self, tmp_path):
        rng = np.random.default_rng(157)
        _write_corpus(rng, tmp_path / "images", tmp_path / "masks", count=2)
        before = corpus_hash(tmp_path / "images") + corpus_hash(tmp_path / "masks")
        augment_dataset(
            tmp_path / "images", tmp_path / "masks", tmp_path / "out", PipelineConfig(min_area=1)
        )
        after = corpus_hash(tmp_path / "images") + corpus_hash(tmp_path / "masks")
        assert before == after

    def test_pairing_error(self, tmp_path):
        rng = np.random.default_rng(163)
        _write_corpus(rng, tmp_path / "images", tmp_path / "masks", count=2)
        (tmp_path / "images" / "orphan.png").write_bytes(
            (tmp_path / "images" / "s000.png").read_bytes()
        )
        with pytest.raises(PairingError):
            augment_dataset(tmp_path / "images", tmp_path / "masks", tmp_path / "out", PipelineConfig())

    def test_failed_sample_recorded_not_fatal(self, tmp_path):
        rng = np.random.default_rng(167)
        _write_corpus(rng, tmp_path / "images", tmp_path / "masks", count=2)
        (tmp_path / "images" / "s000.png").write_bytes(b"corrupt")
        report = augment_dataset(
            tmp_path / "images", tmp_path / "masks", tmp_path / "out", PipelineConfig(min_area=1)
        )
        assert len(report.failures) == 1
        assert report.failures[0]["id"] == "s000"
        assert report.samples_out == 1

    def test_report_consistency(self, tmp_path):
        rng = np.random.default_rng(173)
        _write_corpus(rng, tmp_path / "images", tmp_path / "masks", count=4)
        config = PipelineConfig(min_area=1, multiplier=2, fill=FillStrategy.none())
        report = augment_dataset(tmp_path / "images", tmp_path / "masks", tmp_path / "out", config)
        assert report.objects_augmented + report.objects_skipped == report.objects_seen
        assert sum(report.per_category_counts.values()) == report.objects_augmented
        parsed = json.loads(report.to_json())
        assert parsed["samples_in"] == 4


class TestParseConfig:
    def test_empty_file_gives_documented_defaults(self, tmp_path):
        path = tmp_path / "empty.cfg"
        path.write_text("")
        config = parse_config(path)
        by_kind = {op.kind: op for op in config.ops}
        assert by_kind[OpKind.SCALE].probability == 0.2
        assert by_kind[OpKind.SCALE].magnitude == 0.2
        assert by_kind[OpKind.ROTATE].probability == 0.2
        assert by_kind[OpKind.ROTATE].magnitude == 15.0
        assert by_kind[OpKind.SHIFT].probability == 0.1
        assert by_kind[OpKind.SHIFT].magnitude == 5.0
        assert by_kind[OpKind.FLIP_H].probability == 0.5
        assert by_kind[OpKind.BRIGHTNESS].probability == 0.0
        assert config.fill.variant is FillVariant.DIFFUSION
        assert config.dilation_radius == 3
        assert config.crop_margin == 1.5
        assert config.min_area == 100
        assert config.multiplier == 1

    def test_zero_multiplier_rejected(self, tmp_path):
        path = tmp_path / "bad.cfg"
        path.write_text("multiplier = 0\n")
        with pytest.raises(ValidationError):
            parse_config(path)

    def test_external_without_endpoint_rejected(self, tmp_path):
        path = tmp_path / "bad.cfg"
        path.write_text("fill = external\n")
        with pytest.raises(ValidationError):
            parse_config(path)

    def test_external_with_endpoint(self, tmp_path):
        path = tmp_path / "ok.cfg"
        path.write_text("fill.strategy = external\nfill.endpoint = http://localhost:9000\n")
        config = parse_config(path)
        assert config.fill.variant is FillVariant.EXTERNAL
        assert config.fill.endpoint == "http://localhost:9000"

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "bad.cfg"
        path.write_text("no_such_key = 3\n")
        with pytest.raises(ParseError):
            parse_config(path)

    def test_full_round_trip(self, tmp_path):
        path = tmp_path / "full.cfg"
        path.write_text(
            "\n".join(
                [
                    "seed = 77",
                    "multiplier = 3",
                    "crop_margin = 2.0",
                    "min_area = 10",
                    "dilation_radius = 2",
                    "fill.strategy = noise",
                    "coefficients.mode = rarity",
                    "ops.scale.prob = 0.4",
                    "ops.scale.max = 0.1",
                    "ops.rotate.prob = 0.3",
                    "ops.rotate.max_deg = 30",
                    "ops.shift.prob = 0.2",
                    "ops.shift.max_px = 8",
                    "ops.flip.prob = 0.9",
                    "ops.brightness.prob = 0.1",
                    "ops.brightness.max = 0.3",
                    "categories.allowlist = 1, 2, 7",
                ]
            )
        )
        config = parse_config(path)
        assert config.seed == 77 and config.multiplier == 3
        assert config.category_allowlist == {1, 2, 7}
        by_kind = {op.kind: op for op in config.ops}
        assert by_kind[OpKind.BRIGHTNESS].probability == 0.1
        assert config.fill.variant is FillVariant.NOISE

    def test_hard_mode_requires_scores(self, tmp_path):
        path = tmp_path / "bad.cfg"
        path.write_text("coefficients.mode = hard\n")
        with pytest.raises(ValidationError):
            parse_config(path)

    def test_bad_value_parse_error_names_key(self, tmp_path):
        path = tmp_path / "bad.cfg"
        path.write_text("multiplier = lots\n")
        with pytest.raises(ParseError, match="multiplier"):
            parse_config(path)


class TestCli:
    def test_run_success_exit_zero(self, tmp_path, capsys):
        rng = np.random.default_rng(179)
        _write_corpus(rng, tmp_path / "images", tmp_path / "masks", count=2)
        report_path = tmp_path / "report.json"
        code = cli_main(
            [
                "run",
                "--images", str(tmp_path / "images"),
                "--masks", str(tmp_path / "masks"),
                "--out", str(tmp_path / "out"),
                "--seed", "3",
                "--fill", "noise",
                "--report", str(report_path),
            ]
        )
        assert code == 0
        assert report_path.exists()
        payload = json.loads(report_path.read_text())
        assert payload["samples_in"] == 2
        assert "samples 2 -> 2" in capsys.readouterr().out

    def test_config_error_exit_two(self, tmp_path):
        bad = tmp_path / "bad.cfg"
        bad.write_text("multiplier = 0\n")
        code = cli_main(
            [
                "run",
                "--config", str(bad),
                "--images", str(tmp_path),
                "--masks", str(tmp_path),
                "--out", str(tmp_path / "out"),
            ]
        )
        assert code == 2

    def test_failed_sample_exit_one(self, tmp_path):
        rng = np.random.default_rng(181)
        _write_corpus(rng, tmp_path / "images", tmp_path / "masks", count=1)
        (tmp_path / "images" / "s000.png").write_bytes(b"nope")
        code = cli_main(
            [
                "run",
                "--images", str(tmp_path / "images"),
                "--masks", str(tmp_path / "masks"),
                "--out", str(tmp_path / "out"),
            ]
        )
        assert code == 1

    def test_flag_overrides_config(self, tmp_path):
        rng = np.random.default_rng(191)
        _write_corpus(rng, tmp_path / "images", tmp_path / "masks", count=1)
        cfg = tmp_path / "cfg"
        cfg.write_text("multiplier = 1\nseed = 5\n")
        code = cli_main(
            [
                "run",
                "--config", str(cfg),
                "--images", str(tmp_path / "images"),
                "--masks", str(tmp_path / "masks"),
                "--out", str(tmp_path / "out"),
                "--multiplier", "3",
            ]
        )
        assert code == 0
        assert len(list((tmp_path / "out" / "images").iterdir())) == 3
