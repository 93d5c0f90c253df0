"""Object-level data augmentation engine for semantic segmentation datasets."""

from .augment import (
    AugmentPlan,
    CategoryCoefficients,
    CoefficientMode,
    OpKind,
    OpSpec,
    PlanStep,
    apply_plan,
    build_plan,
    effective_probability,
    hard_coefficients,
    rarity_coefficients,
)
from .assemble import AssemblyInputs, compose_patch, paste_patch, union_and_artifact
from .dataset_io import (
    CategoryStats,
    LabeledSample,
    load_sample,
    load_scores,
    scan_category_stats,
    write_sample,
)
from .fill import FillStrategy, FillVariant, dilate_mask, fill_patch, inpaint_background
from .parsing import (
    BACKGROUND_ID,
    IGNORE_ID,
    BackgroundMask,
    CropSpec,
    ObjectInstance,
    compute_crop,
    crop_patch,
    extract_object,
    split_mask,
)
from .pipeline import (
    PipelineConfig,
    RunReport,
    augment_dataset,
    augment_sample,
    default_ops,
    parse_config,
)
from .seeding import child_seed

__version__ = "0.1.0"

__all__ = [
    "AugmentPlan",
    "AssemblyInputs",
    "BACKGROUND_ID",
    "BackgroundMask",
    "CategoryCoefficients",
    "CategoryStats",
    "CoefficientMode",
    "CropSpec",
    "FillStrategy",
    "FillVariant",
    "IGNORE_ID",
    "LabeledSample",
    "ObjectInstance",
    "OpKind",
    "OpSpec",
    "PipelineConfig",
    "PlanStep",
    "RunReport",
    "apply_plan",
    "augment_dataset",
    "augment_sample",
    "build_plan",
    "child_seed",
    "compose_patch",
    "compute_crop",
    "crop_patch",
    "default_ops",
    "dilate_mask",
    "effective_probability",
    "extract_object",
    "fill_patch",
    "hard_coefficients",
    "inpaint_background",
    "load_sample",
    "load_scores",
    "parse_config",
    "paste_patch",
    "rarity_coefficients",
    "scan_category_stats",
    "split_mask",
    "union_and_artifact",
    "write_sample",
]
