"""Image parsing: decouple a sample into background plus per-object layers.

A semantic mask carries no instance ids, so object instances are realized as
8-connected components of each foreground category.  The binary masks of all
instances plus the background plane partition the image exactly; pixels of
components below ``min_area`` (and ignore-label pixels) fall into the
background plane but are never relabeled in the source mask.
"""

from dataclasses import dataclass
from math import ceil

import numpy as np
from scipy import ndimage

from .errors import DimensionMismatch

BACKGROUND_ID = 0
IGNORE_ID = 255

# 3x3 all-ones structuring element: components touch diagonally.
_EIGHT_CONNECTED = np.ones((3, 3), dtype=bool)


@dataclass(frozen=True)
class ObjectInstance:
    """One connected foreground component of a semantic mask.

    ``mask`` is a full-size boolean plane with exactly this component set,
    ``bbox`` its tight inclusive bounding box as (x0, y0, x1, y1).
    """

    mask: np.ndarray
    category: int
    bbox: tuple[int, int, int, int]
    area: int


@dataclass(frozen=True)
class BackgroundMask:
    """Boolean plane of every pixel not covered by an object instance."""

    mask: np.ndarray


@dataclass(frozen=True)
class CropSpec:
    """Per-object crop window: inclusive (x0, y0, x1, y1) inside the image."""

    rect: tuple[int, int, int, int]
    source_object: int

    @property
    def width(self) -> int:
        return self.rect[2] - self.rect[0] + 1

    @property
    def height(self) -> int:
        return self.rect[3] - self.rect[1] + 1


def split_mask(
    mask: np.ndarray, min_area: int = 1
) -> tuple[list[ObjectInstance], BackgroundMask]:
    """Split a semantic mask into object instances and a background plane.

    Instances are the 8-connected components of each non-background,
    non-ignore category with at least ``min_area`` pixels.  Instances are
    returned in deterministic order: ascending category, then component
    label order within the category.
    """
    if mask.ndim != 2:
        raise DimensionMismatch(f"mask must be 2-D, got shape {mask.shape}")
    if min_area < 1:
        raise ValueError("min_area must be >= 1")

    instances: list[ObjectInstance] = []
    covered = np.zeros(mask.shape, dtype=bool)
    for category in sorted(int(v) for v in np.unique(mask)):
        if category in (BACKGROUND_ID, IGNORE_ID):
            continue
        labeled, count = ndimage.label(mask == category, structure=_EIGHT_CONNECTED)
        for label in range(1, count + 1):
            component = labeled == label
            area = int(component.sum())
            if area < min_area:
                continue
            ys, xs = np.nonzero(component)
            bbox = (int(xs.min()), int(ys.min()), int(xs.max()), int(ys.max()))
            instances.append(ObjectInstance(component, category, bbox, area))
            covered |= component
    return instances, BackgroundMask(~covered)


def extract_object(image: np.ndarray, inst: ObjectInstance) -> np.ndarray:
    """Object layer: image pixels under the instance mask, zero elsewhere."""
    if image.shape[:2] != inst.mask.shape:
        raise DimensionMismatch(
            f"image {image.shape[:2]} vs instance mask {inst.mask.shape}"
        )
    layer = np.zeros_like(image)
    layer[inst.mask] = image[inst.mask]
    return layer


def _center_span(lo: int, hi: int, target: int, limit: int) -> tuple[int, int]:
    # Window of `target` pixels centered on floor of the bbox midpoint,
    # translated minimally into [0, limit).  Full span when it cannot fit.
    if target >= limit:
        return 0, limit - 1
    center = (lo + hi) // 2
    start = center - (target - 1) // 2
    start = min(max(start, 0), limit - target)
    return start, start + target - 1


def compute_crop(
    inst: ObjectInstance,
    margin: float,
    image_dims: tuple[int, int],
    source_object: int = 0,
) -> CropSpec:
    """Crop window centered on the object, sized ``margin`` times its bbox.

    The window always contains the instance bbox; when the target size
    exceeds the image, the window spans the full image along that axis.
    """
    if margin < 1.0:
        raise ValueError("crop margin must be >= 1.0")
    width, height = image_dims
    x0, y0, x1, y1 = inst.bbox
    target_w = ceil(margin * (x1 - x0 + 1))
    target_h = ceil(margin * (y1 - y0 + 1))
    cx0, cx1 = _center_span(x0, x1, target_w, width)
    cy0, cy1 = _center_span(y0, y1, target_h, height)
    return CropSpec((cx0, cy0, cx1, cy1), source_object)


def crop_patch(
    image: np.ndarray, mask: np.ndarray, crop: CropSpec
) -> tuple[np.ndarray, np.ndarray]:
    """Copy the crop rectangle out of aligned image and mask planes."""
    if image.shape[:2] != mask.shape[:2]:
        raise DimensionMismatch(f"image {image.shape[:2]} vs mask {mask.shape[:2]}")
    x0, y0, x1, y1 = crop.rect
    return image[y0 : y1 + 1, x0 : x1 + 1].copy(), mask[y0 : y1 + 1, x0 : x1 + 1].copy()
