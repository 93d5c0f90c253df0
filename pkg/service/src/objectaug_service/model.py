"""Partial-convolution U-Net for hole filling.

Convolutions are conditioned on a validity mask: activations are computed
from valid pixels only, renormalized by the visible window fraction, and the
mask shrinks to where any valid input contributed.  The network is fully
convolutional; any checkpoint produced by :func:`save_checkpoint` can be
served.  Fill quality depends entirely on the weights loaded.
"""

from pathlib import Path

import torch
import torch.nn.functional as F
from torch import nn

CHECKPOINT_FORMAT = "objectaug-pconv-unet/1"


class PartialConv2d(nn.Module):
    """Convolution over valid pixels with mask renormalization and update."""

    def __init__(self, in_channels, out_channels, kernel_size, stride=1, padding=0):
        super().__init__()
        self.conv = nn.Conv2d(
            in_channels, out_channels, kernel_size, stride=stride, padding=padding
        )
        window = torch.ones(1, 1, kernel_size, kernel_size)
        self.register_buffer("window", window)
        self.window_size = float(kernel_size * kernel_size)
        self.stride = stride
        self.padding = padding

    def forward(self, x, mask):
        # mask: (B, 1, H, W), 1 = valid pixel
        with torch.no_grad():
            coverage = F.conv2d(mask, self.window, stride=self.stride, padding=self.padding)
        raw = self.conv(x * mask)
        bias = self.conv.bias.view(1, -1, 1, 1)
        scale = self.window_size / coverage.clamp(min=1.0)
        covered = (coverage > 0).to(x.dtype)
        out = ((raw - bias) * scale + bias) * covered
        return out, covered


class PConvUNet(nn.Module):
    """Three-level encoder/decoder with skip connections and mask tracking."""

    def __init__(self, base_channels: int = 32):
        super().__init__()
        c = base_channels
        self.enc1 = PartialConv2d(3, c, kernel_size=7, stride=2, padding=3)
        self.enc2 = PartialConv2d(c, 2 * c, kernel_size=5, stride=2, padding=2)
        self.enc3 = PartialConv2d(2 * c, 4 * c, kernel_size=3, stride=2, padding=1)
        self.dec3 = PartialConv2d(4 * c + 2 * c, 2 * c, kernel_size=3, padding=1)
        self.dec2 = PartialConv2d(2 * c + c, c, kernel_size=3, padding=1)
        self.dec1 = PartialConv2d(c + 3, 3, kernel_size=3, padding=1)
        self.base_channels = base_channels

    @staticmethod
    def _up(x):
        return F.interpolate(x, scale_factor=2, mode="nearest")

    def forward(self, image, mask):
        """image: (B, 3, H, W) in [0, 1]; mask: (B, 1, H, W), 1 = valid."""
        x1, m1 = self.enc1(image, mask)
        x1 = F.relu(x1)
        x2, m2 = self.enc2(x1, m1)
        x2 = F.relu(x2)
        x3, m3 = self.enc3(x2, m2)
        x3 = F.relu(x3)

        x = torch.cat([self._up(x3), x2], dim=1)
        m = torch.maximum(self._up(m3), m2)
        x, m = self.dec3(x, m)
        x = F.leaky_relu(x, 0.2)

        x = torch.cat([self._up(x), x1], dim=1)
        m = torch.maximum(self._up(m), m1)
        x, m = self.dec2(x, m)
        x = F.leaky_relu(x, 0.2)

        x = torch.cat([self._up(x), image], dim=1)
        m = torch.maximum(self._up(m), mask)
        x, _ = self.dec1(x, m)
        return torch.sigmoid(x)


def save_checkpoint(model: PConvUNet, path: str | Path) -> None:
    payload = {
        "format": CHECKPOINT_FORMAT,
        "base_channels": model.base_channels,
        "state_dict": model.state_dict(),
    }
    torch.save(payload, Path(path))


def save_initial_checkpoint(path: str | Path, seed: int = 0, base_channels: int = 32) -> None:
    """Materialize a randomly initialized checkpoint (protocol smoke tests)."""
    torch.manual_seed(seed)
    save_checkpoint(PConvUNet(base_channels), path)


def load_checkpoint(path: str | Path) -> PConvUNet:
    payload = torch.load(Path(path), map_location="cpu", weights_only=True)
    if not isinstance(payload, dict) or payload.get("format") != CHECKPOINT_FORMAT:
        raise ValueError(f"{path}: not a {CHECKPOINT_FORMAT} checkpoint")
    model = PConvUNet(int(payload["base_channels"]))
    model.load_state_dict(payload["state_dict"])
    model.eval()
    return model
