"""Per-object augmentation: sampled transform plans and their application.

Each object gets an independently drawn plan: every configured op is included
with its category-adjusted probability, then applies in sequence to the
object's image layer and binary mask.  Geometry is resampled by inverse
mapping about the patch center (bilinear image, nearest-neighbor mask), so a
degenerate draw (scale 1.0, angle 0, shift 0) reproduces its input exactly.
"""

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import DimensionMismatch, EmptyInput, NonPositiveScore, ZeroCount


class OpKind(str, Enum):
    SCALE = "scale"
    ROTATE = "rotate"
    SHIFT = "shift"
    FLIP_H = "flip_h"
    BRIGHTNESS = "brightness"


# Default application order; configurable through the ops list itself.
CANONICAL_ORDER = (
    OpKind.SCALE,
    OpKind.ROTATE,
    OpKind.SHIFT,
    OpKind.FLIP_H,
    OpKind.BRIGHTNESS,
)


class CoefficientMode(str, Enum):
    UNIFORM = "uniform"
    HARD_DRIVEN = "hard"
    RARITY_DRIVEN = "rarity"


@dataclass(frozen=True)
class OpSpec:
    """One augmentation op: inclusion probability plus magnitude bound.

    ``magnitude`` is the half-range of the drawn parameter: scale factor in
    [1-m, 1+m] (m < 1 so the factor stays positive), rotation angle in
    [-m, +m] degrees, shift in [-m, +m] integer pixels per axis, brightness
    factor in [1-m, 1+m].  Horizontal flip has no magnitude.
    """

    kind: OpKind
    probability: float
    magnitude: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.probability <= 1.0:
            raise ValueError(f"{self.kind.value}: probability must be in [0, 1]")
        if self.magnitude < 0.0:
            raise ValueError(f"{self.kind.value}: magnitude must be >= 0")
        if self.kind is OpKind.SCALE and self.magnitude >= 1.0:
            raise ValueError("scale magnitude must be < 1 so the factor stays positive")


@dataclass(frozen=True)
class PlanStep:
    """A realized op: ``param`` is the drawn factor, angle in degrees,
    (dx, dy) pixel shift, or None for a flip."""

    kind: OpKind
    param: float | tuple[int, int] | None = None


@dataclass
class AugmentPlan:
    """Ordered realized steps for one object.

    ``skipped`` records indices of steps that degenerated during the last
    apply (mask emptied, or a shift would push mask pixels off the patch).
    """

    steps: list[PlanStep]
    skipped: list[int] = field(default_factory=list)


@dataclass(frozen=True)
class CategoryCoefficients:
    """Per-category probability multipliers; absent categories get 1.0."""

    values: dict[int, float]
    mode: CoefficientMode

    def __post_init__(self) -> None:
        for category, value in self.values.items():
            if value <= 0.0:
                raise ValueError(f"coefficient for category {category} must be > 0")

    @classmethod
    def uniform(cls) -> "CategoryCoefficients":
        return cls({}, CoefficientMode.UNIFORM)

    def get(self, category: int) -> float:
        return self.values.get(category, 1.0)


def _median(values: list[float]) -> float:
    ordered = sorted(values)
    mid = len(ordered) // 2
    if len(ordered) % 2 == 1:
        return ordered[mid]
    return (ordered[mid - 1] + ordered[mid]) / 2.0


def hard_coefficients(scores: dict[int, float]) -> CategoryCoefficients:
    """Hard-driven coefficients: median score over each category's score."""
    if not scores:
        raise EmptyInput("no category scores given")
    for category, score in scores.items():
        if score <= 0.0:
            raise NonPositiveScore(f"category {category}: score {score} is not > 0")
    pivot = _median(list(scores.values()))
    return CategoryCoefficients(
        {category: pivot / score for category, score in scores.items()},
        CoefficientMode.HARD_DRIVEN,
    )


def rarity_coefficients(counts: dict[int, int]) -> CategoryCoefficients:
    """Rarity-driven coefficients: median count over each category's count."""
    if not counts:
        raise EmptyInput("no category counts given")
    for category, count in counts.items():
        if count < 1:
            raise ZeroCount(f"category {category}: count {count} is not >= 1")
    pivot = _median([float(c) for c in counts.values()])
    return CategoryCoefficients(
        {category: pivot / count for category, count in counts.items()},
        CoefficientMode.RARITY_DRIVEN,
    )


def effective_probability(
    op: OpSpec, category: int, coeffs: CategoryCoefficients
) -> float:
    """Category-adjusted inclusion probability, clamped into [0, 1]."""
    return min(1.0, op.probability * coeffs.get(category))


def build_plan(
    ops: list[OpSpec],
    category: int,
    coeffs: CategoryCoefficients,
    rng: np.random.Generator,
) -> AugmentPlan:
    """Draw a plan: one inclusion draw per op, then its parameter if included.

    The draw order follows the ops list, so identical (ops, category,
    coeffs, seed) always produce identical plans.
    """
    steps: list[PlanStep] = []
    for op in ops:
        if rng.random() >= effective_probability(op, category, coeffs):
            continue
        if op.kind is OpKind.SCALE:
            steps.append(PlanStep(op.kind, float(rng.uniform(1.0 - op.magnitude, 1.0 + op.magnitude))))
        elif op.kind is OpKind.ROTATE:
            steps.append(PlanStep(op.kind, float(rng.uniform(-op.magnitude, op.magnitude))))
        elif op.kind is OpKind.SHIFT:
            bound = int(op.magnitude)
            dx = int(rng.integers(-bound, bound + 1))
            dy = int(rng.integers(-bound, bound + 1))
            steps.append(PlanStep(op.kind, (dx, dy)))
        elif op.kind is OpKind.FLIP_H:
            steps.append(PlanStep(op.kind))
        elif op.kind is OpKind.BRIGHTNESS:
            steps.append(PlanStep(op.kind, float(rng.uniform(1.0 - op.magnitude, 1.0 + op.magnitude))))
    return AugmentPlan(steps)


def _round_half_up(values: np.ndarray) -> np.ndarray:
    return np.floor(values + 0.5)


def _gather(plane: np.ndarray, ys: np.ndarray, xs: np.ndarray) -> np.ndarray:
    # Sample integer coordinates with zero outside the plane.
    h, w = plane.shape[:2]
    inside = (xs >= 0) & (xs < w) & (ys >= 0) & (ys < h)
    values = plane[np.clip(ys, 0, h - 1), np.clip(xs, 0, w - 1)].astype(np.float64)
    values[~inside] = 0.0
    return values


def _resample(
    image: np.ndarray, mask: np.ndarray, src_x: np.ndarray, src_y: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Sample (image bilinear, mask nearest) at per-pixel source coordinates."""
    h, w = mask.shape
    nx = np.floor(src_x + 0.5).astype(np.int64)
    ny = np.floor(src_y + 0.5).astype(np.int64)
    inside = (nx >= 0) & (nx < w) & (ny >= 0) & (ny < h)
    new_mask = np.zeros((h, w), dtype=bool)
    new_mask[inside] = mask[ny[inside], nx[inside]]

    x0 = np.floor(src_x).astype(np.int64)
    y0 = np.floor(src_y).astype(np.int64)
    fx = (src_x - x0)[..., None]
    fy = (src_y - y0)[..., None]
    acc = (1.0 - fy) * (1.0 - fx) * _gather(image, y0, x0)
    acc += (1.0 - fy) * fx * _gather(image, y0, x0 + 1)
    acc += fy * (1.0 - fx) * _gather(image, y0 + 1, x0)
    acc += fy * fx * _gather(image, y0 + 1, x0 + 1)
    new_image = np.clip(_round_half_up(acc), 0, 255).astype(np.uint8)
    new_image[~new_mask] = 0
    return new_image, new_mask


def _grid(h: int, w: int) -> tuple[np.ndarray, np.ndarray]:
    ys, xs = np.mgrid[0:h, 0:w]
    return xs.astype(np.float64), ys.astype(np.float64)


def _apply_scale(
    image: np.ndarray, mask: np.ndarray, factor: float
) -> tuple[np.ndarray, np.ndarray]:
    h, w = mask.shape
    cx, cy = (w - 1) / 2.0, (h - 1) / 2.0
    xs, ys = _grid(h, w)
    return _resample(image, mask, cx + (xs - cx) / factor, cy + (ys - cy) / factor)


def _apply_rotate(
    image: np.ndarray, mask: np.ndarray, angle_deg: float
) -> tuple[np.ndarray, np.ndarray]:
    h, w = mask.shape
    cx, cy = (w - 1) / 2.0, (h - 1) / 2.0
    cos_t = math.cos(math.radians(angle_deg))
    sin_t = math.sin(math.radians(angle_deg))
    xs, ys = _grid(h, w)
    dx, dy = xs - cx, ys - cy
    # Inverse rotation: sample where the output pixel came from.
    return _resample(image, mask, cx + cos_t * dx + sin_t * dy, cy - sin_t * dx + cos_t * dy)


def _apply_shift(
    image: np.ndarray, mask: np.ndarray, dx: int, dy: int
) -> tuple[np.ndarray, np.ndarray] | None:
    """Integer translation; None when any set mask pixel would leave the patch."""
    h, w = mask.shape
    ys, xs = np.nonzero(mask)
    if len(xs) > 0:
        if xs.min() + dx < 0 or xs.max() + dx >= w or ys.min() + dy < 0 or ys.max() + dy >= h:
            return None
    new_image = np.zeros_like(image)
    new_mask = np.zeros_like(mask)
    src_x0, src_x1 = max(0, -dx), min(w, w - dx)
    src_y0, src_y1 = max(0, -dy), min(h, h - dy)
    if src_x0 < src_x1 and src_y0 < src_y1:
        dst = (slice(src_y0 + dy, src_y1 + dy), slice(src_x0 + dx, src_x1 + dx))
        src = (slice(src_y0, src_y1), slice(src_x0, src_x1))
        new_image[dst] = image[src]
        new_mask[dst] = mask[src]
    return new_image, new_mask


def apply_plan(
    image_patch: np.ndarray, mask_patch: np.ndarray, plan: AugmentPlan
) -> tuple[np.ndarray, np.ndarray]:
    """Apply a plan to an object layer and its binary mask.

    Steps apply in order; a step that empties the mask, or a shift that
    would push set pixels off the patch, is skipped and recorded in
    ``plan.skipped``.  The output image is zero wherever the output mask is.
    """
    if image_patch.shape[:2] != mask_patch.shape:
        raise DimensionMismatch(
            f"image patch {image_patch.shape[:2]} vs mask patch {mask_patch.shape}"
        )
    values = np.unique(mask_patch)
    if not np.all(np.isin(values, (0, 1))):
        raise ValueError("mask patch must be binary")

    image = image_patch.astype(np.uint8).copy()
    mask = mask_patch.astype(bool).copy()
    plan.skipped = []
    for index, step in enumerate(plan.steps):
        if step.kind is OpKind.SCALE:
            new_image, new_mask = _apply_scale(image, mask, float(step.param))
            if not new_mask.any():
                plan.skipped.append(index)
                continue
            image, mask = new_image, new_mask
        elif step.kind is OpKind.ROTATE:
            new_image, new_mask = _apply_rotate(image, mask, float(step.param))
            if not new_mask.any():
                plan.skipped.append(index)
                continue
            image, mask = new_image, new_mask
        elif step.kind is OpKind.SHIFT:
            dx, dy = step.param
            shifted = _apply_shift(image, mask, dx, dy)
            if shifted is None:
                plan.skipped.append(index)
                continue
            image, mask = shifted
        elif step.kind is OpKind.FLIP_H:
            image = image[:, ::-1].copy()
            mask = mask[:, ::-1].copy()
        elif step.kind is OpKind.BRIGHTNESS:
            scaled = _round_half_up(image[mask].astype(np.float64) * float(step.param))
            image[mask] = np.clip(scaled, 0, 255).astype(np.uint8)
    return image, mask
