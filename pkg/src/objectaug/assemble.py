"""Recombine augmented object, original crop, and inpainted background.

Every patch pixel falls in exactly one of three cases: outside the union of
original and augmented object masks (original pixels pass through), under the
augmented object (augmented pixels, mask relabeled to the object category),
or in the misalignment artifact (inpainted pixels, mask relabeled background).
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InvariantViolation
from .parsing import BACKGROUND_ID, IGNORE_ID, CropSpec


@dataclass(frozen=True)
class AssemblyInputs:
    """Aligned planes for assembling one augmented object into its crop."""

    image_patch: np.ndarray      # original RGB crop
    mask_patch: np.ndarray       # original multi-category mask crop
    object_mask: np.ndarray      # binary footprint of the object in the crop
    aug_image: np.ndarray        # augmented object layer, zero off-mask
    aug_mask: np.ndarray         # binary footprint after augmentation
    inpainted: np.ndarray        # background-repaired RGB crop
    category: int

    def validate(self) -> None:
        shape = self.mask_patch.shape
        planes = {
            "image_patch": self.image_patch.shape[:2],
            "object_mask": self.object_mask.shape,
            "aug_image": self.aug_image.shape[:2],
            "aug_mask": self.aug_mask.shape,
            "inpainted": self.inpainted.shape[:2],
        }
        for name, got in planes.items():
            if got != shape:
                raise InvariantViolation(f"{name} dims {got} != mask patch dims {shape}")
        if self.category in (BACKGROUND_ID, IGNORE_ID):
            raise InvariantViolation(f"category {self.category} is reserved")
        obj = self.object_mask.astype(bool)
        if np.any(self.mask_patch[obj] != self.category):
            raise InvariantViolation("object mask covers pixels of another category")
        aug = self.aug_mask.astype(bool)
        if np.any(self.aug_image[~aug] != 0):
            raise InvariantViolation("augmented image has pixels outside its mask")


def union_and_artifact(
    m_orig: np.ndarray, m_aug: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Union of original and augmented masks, and the uncovered artifact."""
    if m_orig.shape != m_aug.shape:
        raise DimensionMismatch(f"{m_orig.shape} vs {m_aug.shape}")
    m_orig = m_orig.astype(bool)
    m_aug = m_aug.astype(bool)
    return m_orig | m_aug, m_orig & ~m_aug


def compose_patch(inputs: AssemblyInputs) -> tuple[np.ndarray, np.ndarray]:
    """Assemble the augmented patch image and mask."""
    inputs.validate()
    _, artifact = union_and_artifact(inputs.object_mask, inputs.aug_mask)
    aug = inputs.aug_mask.astype(bool)
    image = inputs.image_patch.copy()
    mask = inputs.mask_patch.copy()
    image[aug] = inputs.aug_image[aug]
    mask[aug] = inputs.category
    image[artifact] = inputs.inpainted[artifact]
    mask[artifact] = BACKGROUND_ID
    return image, mask


def paste_patch(
    image: np.ndarray,
    mask: np.ndarray,
    crop: CropSpec,
    patch_image: np.ndarray,
    patch_mask: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Write patch planes back under the crop rectangle, in place."""
    x0, y0, x1, y1 = crop.rect
    expected = (y1 - y0 + 1, x1 - x0 + 1)
    if patch_image.shape[:2] != expected or patch_mask.shape[:2] != expected:
        raise DimensionMismatch(
            f"patch dims {patch_image.shape[:2]}/{patch_mask.shape[:2]} vs crop {expected}"
        )
    image[y0 : y1 + 1, x0 : x1 + 1] = patch_image
    mask[y0 : y1 + 1, x0 : x1 + 1] = patch_mask
    return image, mask
