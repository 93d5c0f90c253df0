"""Dataset ingestion and emission.

On-disk format follows the VOC convention: 8-bit RGB PNG images next to
single-channel 8-bit PNG masks whose pixel values are category ids, with
background fixed at 0 and ignore at 255.  Palette-indexed masks are read by
index, never by palette color.  Writing then re-loading a sample reproduces
it bit-exactly.
"""

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

from . import parsing
from .errors import (
    DecodeError,
    DimensionMismatch,
    IoError,
    ParseError,
    ScoreOutOfRange,
    UnknownLabel,
)
from .parsing import BACKGROUND_ID, IGNORE_ID

DEFAULT_MIN_AREA = 100


@dataclass
class LabeledSample:
    """An RGB image paired with its category-indexed semantic mask."""

    image: np.ndarray  # H x W x 3 uint8
    mask: np.ndarray   # H x W uint8
    id: str

    def validate(self, categories: set[int] | None = None) -> None:
        if self.image.ndim != 3 or self.image.shape[2] != 3:
            raise DecodeError(f"image must be H x W x 3, got {self.image.shape}")
        if self.mask.ndim != 2:
            raise DecodeError(f"mask must be H x W, got {self.mask.shape}")
        if self.image.shape[:2] != self.mask.shape:
            raise DimensionMismatch(
                f"image {self.image.shape[:2]} vs mask {self.mask.shape}"
            )
        if categories is not None:
            allowed = set(categories) | {BACKGROUND_ID, IGNORE_ID}
            present = {int(v) for v in np.unique(self.mask)}
            unknown = present - allowed
            if unknown:
                raise UnknownLabel(f"mask values {sorted(unknown)} not in category set")


@dataclass
class CategoryStats:
    """Per-category object counts and optional performance scores."""

    counts: dict[int, int] = field(default_factory=dict)
    scores: dict[int, float] | None = None


def _open_image(path: Path) -> Image.Image:
    try:
        image = Image.open(path)
        image.load()
        return image
    except FileNotFoundError:
        raise
    except Exception as exc:
        raise DecodeError(f"{path}: {exc}") from exc


def load_sample(
    image_path: str | Path,
    mask_path: str | Path,
    categories: set[int] | None = None,
) -> LabeledSample:
    """Load an (image, mask) pair; the sample id is the image file stem.

    The mask file must be single-channel 8-bit or palette-indexed; palette
    masks yield their index values.  When ``categories`` is given, any mask
    value outside it (plus background 0 and ignore 255) raises UnknownLabel.
    """
    image_path, mask_path = Path(image_path), Path(mask_path)
    pil_image = _open_image(image_path)
    if pil_image.mode != "RGB":
        try:
            pil_image = pil_image.convert("RGB")
        except Exception as exc:
            raise DecodeError(f"{image_path}: cannot convert to RGB: {exc}") from exc
    pil_mask = _open_image(mask_path)
    if pil_mask.mode not in ("L", "P"):
        raise DecodeError(
            f"{mask_path}: mask mode {pil_mask.mode!r} is not single-channel 8-bit"
        )
    sample = LabeledSample(
        image=np.asarray(pil_image, dtype=np.uint8),
        mask=np.asarray(pil_mask, dtype=np.uint8),
        id=image_path.stem,
    )
    sample.validate(categories)
    return sample


def write_sample(sample: LabeledSample, out_dir: str | Path) -> tuple[Path, Path]:
    """Write a sample as PNG pair under out_dir/images and out_dir/masks."""
    sample.validate()
    out_dir = Path(out_dir)
    image_path = out_dir / "images" / f"{sample.id}.png"
    mask_path = out_dir / "masks" / f"{sample.id}.png"
    try:
        image_path.parent.mkdir(parents=True, exist_ok=True)
        mask_path.parent.mkdir(parents=True, exist_ok=True)
        Image.fromarray(sample.image, mode="RGB").save(image_path, format="PNG")
        Image.fromarray(sample.mask, mode="L").save(mask_path, format="PNG")
    except OSError as exc:
        raise IoError(f"cannot write sample {sample.id!r}: {exc}") from exc
    return image_path, mask_path


def scan_category_stats(
    masks: list[np.ndarray] | tuple[np.ndarray, ...],
    min_area: int = DEFAULT_MIN_AREA,
) -> CategoryStats:
    """Count connected objects of each category across a list of masks."""
    counts: dict[int, int] = {}
    for mask in masks:
        instances, _ = parsing.split_mask(mask, min_area)
        for inst in instances:
            counts[inst.category] = counts.get(inst.category, 0) + 1
    return CategoryStats(counts=counts)


def load_scores(path: str | Path) -> dict[int, float]:
    """Parse a `category_id score` per line text file; `#` starts a comment."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot read scores file {path}: {exc}") from exc
    scores: dict[int, float] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ParseError(f"{path}:{lineno}: expected `category_id score`, got {raw!r}")
        try:
            category = int(parts[0])
        except ValueError as exc:
            raise ParseError(f"{path}:{lineno}: bad category id {parts[0]!r}") from exc
        if category in (BACKGROUND_ID, IGNORE_ID) or not 0 <= category <= 255:
            raise ParseError(f"{path}:{lineno}: category id {category} is reserved or out of range")
        if category in scores:
            raise ParseError(f"{path}:{lineno}: duplicate category id {category}")
        try:
            score = float(parts[1])
        except ValueError as exc:
            raise ParseError(f"{path}:{lineno}: bad score {parts[1]!r}") from exc
        if not 0.0 < score <= 1.0:
            raise ScoreOutOfRange(f"{path}:{lineno}: score {score} outside (0, 1]")
        scores[category] = score
    return scores
