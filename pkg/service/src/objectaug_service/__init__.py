"""HTTP sidecar serving partial-convolution image inpainting."""

from .model import (
    PConvUNet,
    load_checkpoint,
    save_checkpoint,
    save_initial_checkpoint,
)
from .service import ServiceState, create_app

__version__ = "0.1.0"

__all__ = [
    "PConvUNet",
    "ServiceState",
    "create_app",
    "load_checkpoint",
    "save_checkpoint",
    "save_initial_checkpoint",
]
