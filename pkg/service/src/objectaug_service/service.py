"""HTTP service speaking the inpaint wire protocol.

POST /v1/inpaint takes {"image": b64 RGB PNG, "mask": b64 single-channel PNG
(255 = hole)} and returns {"image": b64 RGB PNG} of identical dimensions.
The request is resized to the model's input size for inference and resized
back; pixels outside the hole are composited from the request bit-exactly,
so only hole content ever comes from the model.  GET /v1/health reports
readiness; inpaint requests are rejected with 503 until the checkpoint is
loaded.
"""

import base64
import io
import threading
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from PIL import Image

from .model import PConvUNet, load_checkpoint


@dataclass
class ServiceState:
    model: PConvUNet | None = None
    model_name: str = ""
    input_size: int = 256
    error: str = ""
    lock: threading.Lock = field(default_factory=threading.Lock)

    @property
    def ready(self) -> bool:
        return self.model is not None


class PayloadError(ValueError):
    """Request payload cannot be decoded or violates the protocol."""


def _decode_b64_png(payload, expect_rgb: bool) -> np.ndarray:
    if not isinstance(payload, str):
        raise PayloadError("image and mask must be base64 strings")
    try:
        raw = base64.b64decode(payload, validate=True)
        image = Image.open(io.BytesIO(raw))
        image.load()
    except Exception as exc:
        raise PayloadError(f"undecodable PNG payload: {exc}") from exc
    if expect_rgb:
        if image.mode != "RGB":
            raise PayloadError(f"image mode {image.mode!r}, expected RGB")
    elif image.mode not in ("L", "P", "1"):
        raise PayloadError(f"mask mode {image.mode!r}, expected single-channel")
    return np.asarray(image, dtype=np.uint8)


def _encode_png(array: np.ndarray) -> str:
    buffer = io.BytesIO()
    Image.fromarray(array, mode="RGB").save(buffer, format="PNG")
    return base64.b64encode(buffer.getvalue()).decode("ascii")


def run_inference(state: ServiceState, image: np.ndarray, hole: np.ndarray) -> np.ndarray:
    """Resize to the model grid, predict, resize back, composite copy-through."""
    height, width = hole.shape
    size = state.input_size
    pil_image = Image.fromarray(image, mode="RGB").resize((size, size), Image.BILINEAR)
    pil_hole = Image.fromarray(hole.astype(np.uint8) * 255, mode="L").resize(
        (size, size), Image.NEAREST
    )
    scaled = np.asarray(pil_image, dtype=np.float32) / 255.0
    valid = (np.asarray(pil_hole) < 128).astype(np.float32)

    image_t = torch.from_numpy(scaled.transpose(2, 0, 1))[None]
    mask_t = torch.from_numpy(valid)[None, None]
    with state.lock, torch.no_grad():
        prediction = state.model(image_t, mask_t)[0]
    predicted = (prediction.numpy().transpose(1, 2, 0) * 255.0).round()
    predicted = np.clip(predicted, 0, 255).astype(np.uint8)
    restored = np.asarray(
        Image.fromarray(predicted, mode="RGB").resize((width, height), Image.BILINEAR),
        dtype=np.uint8,
    )
    # Copy-through is enforced here, never trusted from the model.
    return np.where(hole[..., None], restored, image)


def create_app(checkpoint: str | Path | None, input_size: int = 256) -> FastAPI:
    if input_size < 16 or input_size % 8 != 0:
        raise ValueError("input size must be >= 16 and divisible by 8")
    state = ServiceState(input_size=input_size)
    if checkpoint is not None:
        try:
            state.model = load_checkpoint(checkpoint)
            state.model_name = Path(checkpoint).name
        except Exception as exc:
            state.error = str(exc)

    app = FastAPI(title="objectaug inpaint service")
    app.state.service = state

    @app.get("/v1/health")
    def health():
        payload = {"ready": state.ready, "model": state.model_name or None}
        if state.error:
            payload["error"] = state.error
        return JSONResponse(payload)

    @app.post("/v1/inpaint")
    async def inpaint(request: Request):
        if not state.ready:
            return JSONResponse({"error": "model not ready"}, status_code=503)
        try:
            body = await request.json()
        except Exception:
            return JSONResponse({"error": "body is not valid JSON"}, status_code=400)
        try:
            if not isinstance(body, dict):
                raise PayloadError("body must be a JSON object")
            image = _decode_b64_png(body.get("image"), expect_rgb=True)
            mask = _decode_b64_png(body.get("mask"), expect_rgb=False)
        except PayloadError as exc:
            return JSONResponse({"error": str(exc)}, status_code=400)
        if image.shape[:2] != mask.shape[:2]:
            return JSONResponse(
                {"error": f"image dims {image.shape[:2]} != mask dims {mask.shape[:2]}"},
                status_code=400,
            )
        hole = mask >= 128
        try:
            result = run_inference(state, image, hole)
        except Exception as exc:
            return JSONResponse({"error": f"inference failed: {exc}"}, status_code=500)
        return JSONResponse({"image": _encode_png(result)})

    return app
