"""Pipeline orchestration: per-sample object loop and batch execution.

Each sample is processed independently: parse objects from the original
mask, then for each object (largest first) crop a window around it, draw and
apply an augmentation plan, repair the uncovered background, and paste the
assembled patch back.  Seeds derive from (run seed, sample stem, copy index,
object ordinal) through a documented mixer, so a corpus is a pure function of
(input corpus, config) regardless of worker count or enumeration order.
"""

import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import assemble, augment, dataset_io, fill, parsing
from .augment import CategoryCoefficients, CoefficientMode, OpKind, OpSpec
from .dataset_io import DEFAULT_MIN_AREA, LabeledSample
from .errors import ObjectAugError, PairingError, ParseError, ValidationError
from .fill import DEFAULT_DILATION_RADIUS, DEFAULT_DIFFUSION_ITERS, FillStrategy, FillVariant
from .seeding import child_seed

DEFAULT_CROP_MARGIN = 1.5

IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg", ".bmp")


def default_ops() -> list[OpSpec]:
    """Canonical-order op list with the default probabilities and bounds."""
    return [
        OpSpec(OpKind.SCALE, probability=0.2, magnitude=0.2),
        OpSpec(OpKind.ROTATE, probability=0.2, magnitude=15.0),
        OpSpec(OpKind.SHIFT, probability=0.1, magnitude=5.0),
        OpSpec(OpKind.FLIP_H, probability=0.5),
        OpSpec(OpKind.BRIGHTNESS, probability=0.0, magnitude=0.2),
    ]


@dataclass
class PipelineConfig:
    ops: list[OpSpec] = field(default_factory=default_ops)
    coefficient_mode: CoefficientMode = CoefficientMode.UNIFORM
    scores_path: str | None = None
    fill: FillStrategy = field(default_factory=FillStrategy.diffusion)
    dilation_radius: int = DEFAULT_DILATION_RADIUS
    crop_margin: float = DEFAULT_CROP_MARGIN
    min_area: int = DEFAULT_MIN_AREA
    multiplier: int = 1
    seed: int = 0
    category_allowlist: set[int] | None = None

    def validate(self) -> None:
        if self.multiplier < 1:
            raise ValidationError("multiplier must be >= 1")
        if self.crop_margin < 1.0:
            raise ValidationError("crop_margin must be >= 1.0")
        if self.min_area < 1:
            raise ValidationError("min_area must be >= 1")
        if self.dilation_radius < 0:
            raise ValidationError("dilation_radius must be >= 0")
        if self.coefficient_mode is CoefficientMode.HARD_DRIVEN and not self.scores_path:
            raise ValidationError("hard-driven coefficients need coefficients.scores_path")
        if self.category_allowlist is not None:
            bad = {c for c in self.category_allowlist if not 1 <= c <= 254}
            if bad:
                raise ValidationError(f"allowlist ids out of range: {sorted(bad)}")


@dataclass
class SampleStats:
    objects_seen: int = 0
    objects_augmented: int = 0
    objects_skipped: int = 0
    per_op: dict[str, int] = field(default_factory=dict)
    per_category: dict[int, int] = field(default_factory=dict)
    fill_time_s: float = 0.0


@dataclass
class RunReport:
    samples_in: int = 0
    samples_out: int = 0
    objects_seen: int = 0
    objects_augmented: int = 0
    objects_skipped: int = 0
    per_op_counts: dict[str, int] = field(default_factory=dict)
    per_category_counts: dict[int, int] = field(default_factory=dict)
    failures: list[dict] = field(default_factory=list)
    wall_time_s: float = 0.0
    fill_time_s: float = 0.0

    def merge_sample(self, stats: SampleStats) -> None:
        self.objects_seen += stats.objects_seen
        self.objects_augmented += stats.objects_augmented
        self.objects_skipped += stats.objects_skipped
        for op, n in stats.per_op.items():
            self.per_op_counts[op] = self.per_op_counts.get(op, 0) + n
        for cat, n in stats.per_category.items():
            self.per_category_counts[cat] = self.per_category_counts.get(cat, 0) + n
        self.fill_time_s += stats.fill_time_s

    def to_json(self) -> str:
        payload = {
            "samples_in": self.samples_in,
            "samples_out": self.samples_out,
            "objects_seen": self.objects_seen,
            "objects_augmented": self.objects_augmented,
            "objects_skipped": self.objects_skipped,
            "per_op_counts": dict(sorted(self.per_op_counts.items())),
            "per_category_counts": {
                str(k): v for k, v in sorted(self.per_category_counts.items())
            },
            "failures": self.failures,
            "wall_time_s": round(self.wall_time_s, 6),
            "fill_time_s": round(self.fill_time_s, 6),
        }
        return json.dumps(payload, indent=2)


def _processing_order(instances: list[parsing.ObjectInstance]) -> list[int]:
    # Largest first so later (smaller) objects paste on top; ties broken by
    # category then bbox position to keep the order deterministic.
    def key(index: int):
        inst = instances[index]
        return (-inst.area, inst.category, inst.bbox[1], inst.bbox[0])

    return sorted(range(len(instances)), key=key)


def augment_sample_with_stats(
    sample: LabeledSample,
    config: PipelineConfig,
    coeffs: CategoryCoefficients,
    seed: int,
) -> tuple[LabeledSample, SampleStats]:
    """Run the object loop on one sample; the input is never mutated."""
    height, width = sample.mask.shape
    image = sample.image.copy()
    mask = sample.mask.copy()
    stats = SampleStats()

    instances, _ = parsing.split_mask(sample.mask, config.min_area)
    stats.objects_seen = len(instances)
    for ordinal in _processing_order(instances):
        inst = instances[ordinal]
        if (
            config.category_allowlist is not None
            and inst.category not in config.category_allowlist
        ):
            stats.objects_skipped += 1
            continue
        rng = np.random.default_rng(child_seed(seed, sample.id, ordinal))
        plan = augment.build_plan(config.ops, inst.category, coeffs, rng)
        if not plan.steps:
            stats.objects_skipped += 1
            continue

        # Earlier objects may have pasted over this one; only what is still
        # labeled with its category counts as the object now.
        live = inst.mask & (mask == inst.category)
        if not live.any():
            stats.objects_skipped += 1
            continue

        crop = parsing.compute_crop(inst, config.crop_margin, (width, height), ordinal)
        image_patch, mask_patch = parsing.crop_patch(image, mask, crop)
        x0, y0, x1, y1 = crop.rect
        object_mask = live[y0 : y1 + 1, x0 : x1 + 1]
        object_layer = np.where(object_mask[..., None], image_patch, 0)

        aug_image, aug_mask = augment.apply_plan(object_layer, object_mask, plan)
        fill_started = time.perf_counter()
        inpainted = fill.inpaint_background(
            image_patch, object_mask, config.dilation_radius, config.fill, rng
        )
        stats.fill_time_s += time.perf_counter() - fill_started

        patch_image, patch_mask = assemble.compose_patch(
            assemble.AssemblyInputs(
                image_patch=image_patch,
                mask_patch=mask_patch,
                object_mask=object_mask,
                aug_image=aug_image,
                aug_mask=aug_mask,
                inpainted=inpainted,
                category=inst.category,
            )
        )
        assemble.paste_patch(image, mask, crop, patch_image, patch_mask)

        stats.objects_augmented += 1
        stats.per_category[inst.category] = stats.per_category.get(inst.category, 0) + 1
        for index, step in enumerate(plan.steps):
            if index not in plan.skipped:
                stats.per_op[step.kind.value] = stats.per_op.get(step.kind.value, 0) + 1
    return LabeledSample(image, mask, sample.id), stats


def augment_sample(
    sample: LabeledSample,
    config: PipelineConfig,
    coeffs: CategoryCoefficients,
    seed: int,
) -> LabeledSample:
    out, _ = augment_sample_with_stats(sample, config, coeffs, seed)
    return out


def pair_by_stem(image_dir: Path, mask_dir: Path) -> list[tuple[str, Path, Path]]:
    """Match image files to mask files sharing the same stem."""
    images = {
        p.stem: p
        for p in sorted(image_dir.iterdir())
        if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES
    }
    masks = {
        p.stem: p
        for p in sorted(mask_dir.iterdir())
        if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES
    }
    unmatched_images = sorted(set(images) - set(masks))
    unmatched_masks = sorted(set(masks) - set(images))
    if unmatched_images or unmatched_masks:
        raise PairingError(
            f"images without masks: {unmatched_images}; masks without images: {unmatched_masks}"
        )
    return [(stem, images[stem], masks[stem]) for stem in sorted(images)]


def compute_coefficients(
    config: PipelineConfig, pairs: list[tuple[str, Path, Path]]
) -> CategoryCoefficients:
    """Dataset-level coefficients, computed once per run."""
    if config.coefficient_mode is CoefficientMode.UNIFORM:
        return CategoryCoefficients.uniform()
    if config.coefficient_mode is CoefficientMode.HARD_DRIVEN:
        scores = dataset_io.load_scores(config.scores_path)
        return augment.hard_coefficients(scores)
    masks = [
        dataset_io.load_sample(image_path, mask_path).mask
        for _, image_path, mask_path in pairs
    ]
    stats = dataset_io.scan_category_stats(masks, config.min_area)
    if not stats.counts:
        return CategoryCoefficients.uniform()
    return augment.rarity_coefficients(stats.counts)


def augment_dataset(
    image_dir: str | Path,
    mask_dir: str | Path,
    out_dir: str | Path,
    config: PipelineConfig,
    workers: int = 1,
) -> RunReport:
    """Write ``multiplier`` augmented copies of every input sample.

    Outputs land in out_dir/images and out_dir/masks as `{stem}_aug{i}.png`.
    A failing sample is recorded in the report and does not stop the batch.
    """
    config.validate()
    started = time.perf_counter()
    image_dir, mask_dir, out_dir = Path(image_dir), Path(mask_dir), Path(out_dir)
    pairs = pair_by_stem(image_dir, mask_dir)
    report = RunReport(samples_in=len(pairs))
    coeffs = compute_coefficients(config, pairs)

    def run_one(job: tuple[str, Path, Path]) -> tuple[str, list[SampleStats], int, str | None]:
        stem, image_path, mask_path = job
        stats_list: list[SampleStats] = []
        written = 0
        try:
            sample = dataset_io.load_sample(image_path, mask_path)
            for copy_index in range(config.multiplier):
                seed = child_seed(config.seed, stem, copy_index)
                out, stats = augment_sample_with_stats(sample, config, coeffs, seed)
                out.id = f"{stem}_aug{copy_index}"
                dataset_io.write_sample(out, out_dir)
                stats_list.append(stats)
                written += 1
        except ObjectAugError as exc:
            return stem, stats_list, written, f"{type(exc).__name__}: {exc}"
        return stem, stats_list, written, None

    if workers <= 1:
        results = [run_one(job) for job in pairs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run_one, pairs))

    for stem, stats_list, written, error in sorted(results, key=lambda r: r[0]):
        report.samples_out += written
        for stats in stats_list:
            report.merge_sample(stats)
        if error is not None:
            report.failures.append({"id": stem, "error": error})
    report.wall_time_s = time.perf_counter() - started
    return report


# Config file keys (flat `key = value` lines, `#` comments). `fill` is an
# accepted alias for `fill.strategy`.
_CONFIG_KEYS = {
    "seed",
    "multiplier",
    "crop_margin",
    "min_area",
    "dilation_radius",
    "fill",
    "fill.strategy",
    "fill.endpoint",
    "fill.timeout",
    "fill.diffusion_iters",
    "coefficients.mode",
    "coefficients.scores_path",
    "ops.scale.prob",
    "ops.scale.max",
    "ops.rotate.prob",
    "ops.rotate.max_deg",
    "ops.shift.prob",
    "ops.shift.max_px",
    "ops.flip.prob",
    "ops.brightness.prob",
    "ops.brightness.max",
    "categories.allowlist",
}

_COEFFICIENT_NAMES = {
    "uniform": CoefficientMode.UNIFORM,
    "hard": CoefficientMode.HARD_DRIVEN,
    "hard_driven": CoefficientMode.HARD_DRIVEN,
    "rarity": CoefficientMode.RARITY_DRIVEN,
    "rarity_driven": CoefficientMode.RARITY_DRIVEN,
}


def _read_entries(path: Path) -> dict[str, str]:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read config {path}: {exc}") from exc
    entries: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"{path}:{lineno}: expected `key = value`, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _CONFIG_KEYS:
            raise ParseError(f"{path}:{lineno}: unknown key {key!r}")
        if key in entries:
            raise ParseError(f"{path}:{lineno}: duplicate key {key!r}")
        entries[key] = value
    return entries


def _get_int(entries: dict[str, str], key: str, default: int) -> int:
    if key not in entries:
        return default
    try:
        return int(entries[key])
    except ValueError as exc:
        raise ParseError(f"{key}: not an integer: {entries[key]!r}") from exc


def _get_float(entries: dict[str, str], key: str, default: float) -> float:
    if key not in entries:
        return default
    try:
        return float(entries[key])
    except ValueError as exc:
        raise ParseError(f"{key}: not a number: {entries[key]!r}") from exc


def build_fill_strategy(
    name: str,
    endpoint: str = "",
    diffusion_iters: int = DEFAULT_DIFFUSION_ITERS,
    timeout: float = fill.DEFAULT_TIMEOUT_S,
) -> FillStrategy:
    """Build a FillStrategy from config/CLI values, as ValidationError."""
    try:
        variant = FillVariant(name.lower())
    except ValueError as exc:
        raise ValidationError(f"fill.strategy: unknown strategy {name!r}") from exc
    try:
        if variant is FillVariant.EXTERNAL:
            if not endpoint:
                raise ValidationError("fill.strategy external needs fill.endpoint")
            return FillStrategy.external(endpoint, timeout)
        if variant is FillVariant.DIFFUSION:
            return FillStrategy.diffusion(diffusion_iters)
        return FillStrategy(variant)
    except ValueError as exc:
        raise ValidationError(str(exc)) from exc


def parse_config(path: str | Path) -> PipelineConfig:
    """Parse and validate a config file; absent keys take documented defaults."""
    entries = _read_entries(Path(path))
    defaults = {op.kind: op for op in default_ops()}

    def op_spec(kind: OpKind, prob_key: str, mag_key: str | None) -> OpSpec:
        base = defaults[kind]
        probability = _get_float(entries, prob_key, base.probability)
        magnitude = base.magnitude if mag_key is None else _get_float(entries, mag_key, base.magnitude)
        try:
            return OpSpec(kind, probability, magnitude)
        except ValueError as exc:
            raise ValidationError(str(exc)) from exc

    ops = [
        op_spec(OpKind.SCALE, "ops.scale.prob", "ops.scale.max"),
        op_spec(OpKind.ROTATE, "ops.rotate.prob", "ops.rotate.max_deg"),
        op_spec(OpKind.SHIFT, "ops.shift.prob", "ops.shift.max_px"),
        op_spec(OpKind.FLIP_H, "ops.flip.prob", None),
        op_spec(OpKind.BRIGHTNESS, "ops.brightness.prob", "ops.brightness.max"),
    ]

    mode_name = entries.get("coefficients.mode", "uniform").lower()
    if mode_name not in _COEFFICIENT_NAMES:
        raise ValidationError(f"coefficients.mode: unknown mode {mode_name!r}")

    strategy_name = entries.get("fill.strategy", entries.get("fill", "diffusion"))
    strategy = build_fill_strategy(
        strategy_name,
        endpoint=entries.get("fill.endpoint", ""),
        diffusion_iters=_get_int(entries, "fill.diffusion_iters", DEFAULT_DIFFUSION_ITERS),
        timeout=_get_float(entries, "fill.timeout", fill.DEFAULT_TIMEOUT_S),
    )

    allowlist: set[int] | None = None
    if "categories.allowlist" in entries:
        raw = entries["categories.allowlist"].strip("[]")
        try:
            allowlist = {int(token) for token in raw.split(",") if token.strip()}
        except ValueError as exc:
            raise ParseError(f"categories.allowlist: bad id list {entries['categories.allowlist']!r}") from exc

    config = PipelineConfig(
        ops=ops,
        coefficient_mode=_COEFFICIENT_NAMES[mode_name],
        scores_path=entries.get("coefficients.scores_path"),
        fill=strategy,
        dilation_radius=_get_int(entries, "dilation_radius", DEFAULT_DILATION_RADIUS),
        crop_margin=_get_float(entries, "crop_margin", DEFAULT_CROP_MARGIN),
        min_area=_get_int(entries, "min_area", DEFAULT_MIN_AREA),
        multiplier=_get_int(entries, "multiplier", 1),
        seed=_get_int(entries, "seed", 0),
        category_allowlist=allowlist,
    )
    config.validate()
    return config
