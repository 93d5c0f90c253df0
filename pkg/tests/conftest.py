"""Shared test fixtures: synthetic samples and a stub inpaint endpoint."""

import base64
import hashlib
import io
import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

import numpy as np
import pytest
from PIL import Image

from objectaug.dataset_io import LabeledSample


def paint_object(mask: np.ndarray, rng: np.random.Generator, category: int) -> None:
    """Paint one random rectangle or ellipse of the category into the mask."""
    height, width = mask.shape
    obj_w = int(rng.integers(2, max(3, width // 2) + 1))
    obj_h = int(rng.integers(2, max(3, height // 2) + 1))
    x0 = int(rng.integers(0, width - obj_w + 1))
    y0 = int(rng.integers(0, height - obj_h + 1))
    if rng.random() < 0.5:
        mask[y0 : y0 + obj_h, x0 : x0 + obj_w] = category
    else:
        ys, xs = np.mgrid[0:height, 0:width]
        cx, cy = x0 + (obj_w - 1) / 2.0, y0 + (obj_h - 1) / 2.0
        rx, ry = max(obj_w / 2.0, 1.0), max(obj_h / 2.0, 1.0)
        mask[((xs - cx) / rx) ** 2 + ((ys - cy) / ry) ** 2 <= 1.0] = category


def synthetic_sample(
    rng: np.random.Generator,
    width: int | None = None,
    height: int | None = None,
    n_objects: int | None = None,
    categories: tuple[int, ...] = (1, 2, 3, 4, 5),
    with_ignore: bool = False,
    sample_id: str = "synthetic",
) -> LabeledSample:
    """Random image plus a mask of random rectangle/ellipse objects."""
    width = width or int(rng.integers(32, 129))
    height = height or int(rng.integers(32, 129))
    image = rng.integers(0, 256, size=(height, width, 3), dtype=np.uint8)
    mask = np.zeros((height, width), dtype=np.uint8)
    for _ in range(n_objects if n_objects is not None else int(rng.integers(1, 6))):
        paint_object(mask, rng, int(rng.choice(categories)))
    if with_ignore:
        x = int(rng.integers(0, max(1, width - 4)))
        y = int(rng.integers(0, max(1, height - 4)))
        mask[y : y + 4, x : x + 4] = 255
    return LabeledSample(image=image, mask=mask, id=sample_id)


def flood_components(binary: np.ndarray, eight_connected: bool) -> list[np.ndarray]:
    """Flood-fill connected components oracle, 4- or 8-connectivity."""
    height, width = binary.shape
    seen = np.zeros_like(binary, dtype=bool)
    if eight_connected:
        moves = [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)]
    else:
        moves = [(-1, 0), (1, 0), (0, -1), (0, 1)]
    components = []
    for sy in range(height):
        for sx in range(width):
            if not binary[sy, sx] or seen[sy, sx]:
                continue
            component = np.zeros_like(binary, dtype=bool)
            stack = [(sy, sx)]
            seen[sy, sx] = True
            while stack:
                y, x = stack.pop()
                component[y, x] = True
                for dy, dx in moves:
                    ny, nx = y + dy, x + dx
                    if 0 <= ny < height and 0 <= nx < width:
                        if binary[ny, nx] and not seen[ny, nx]:
                            seen[ny, nx] = True
                            stack.append((ny, nx))
            components.append(component)
    return components


def corpus_hash(root: Path) -> str:
    """Order-independent digest of every file under root."""
    digest = hashlib.sha256()
    for path in sorted(p for p in root.rglob("*") if p.is_file()):
        digest.update(str(path.relative_to(root)).encode())
        digest.update(path.read_bytes())
    return digest.hexdigest()


class _StubInpaintHandler(BaseHTTPRequestHandler):
    """Protocol-conformant stub: fills hole pixels with a constant."""

    fill_value = 42
    behavior = "ok"  # ok | garbage | not_ready | wrong_dims

    def log_message(self, *args):  # keep pytest output clean
        pass

    def do_POST(self):
        if self.path != "/v1/inpaint":
            self.send_error(404)
            return
        if self.behavior == "not_ready":
            self._reply(503, {"error": "model not ready"})
            return
        if self.behavior == "garbage":
            self.send_response(200)
            self.send_header("Content-Type", "application/json")
            self.end_headers()
            self.wfile.write(b"{not json")
            return
        body = self.rfile.read(int(self.headers.get("Content-Length", "0")))
        try:
            payload = json.loads(body)
            image = np.asarray(
                Image.open(io.BytesIO(base64.b64decode(payload["image"]))).convert("RGB")
            )
            hole = np.asarray(Image.open(io.BytesIO(base64.b64decode(payload["mask"]))))
        except Exception as exc:
            self._reply(400, {"error": str(exc)})
            return
        if image.shape[:2] != hole.shape[:2]:
            self._reply(400, {"error": "dimension mismatch"})
            return
        out = image.copy()
        out[hole >= 128] = self.fill_value
        if self.behavior == "wrong_dims":
            out = out[: max(1, out.shape[0] - 1)]
        buffer = io.BytesIO()
        Image.fromarray(out, mode="RGB").save(buffer, format="PNG")
        self._reply(200, {"image": base64.b64encode(buffer.getvalue()).decode("ascii")})

    def _reply(self, status: int, payload: dict):
        body = json.dumps(payload).encode()
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)


class StubInpaintServer:
    def __init__(self):
        self.httpd = ThreadingHTTPServer(("127.0.0.1", 0), _StubInpaintHandler)
        self.thread = threading.Thread(target=self.httpd.serve_forever, daemon=True)
        self.thread.start()

    @property
    def endpoint(self) -> str:
        return f"http://127.0.0.1:{self.httpd.server_address[1]}"

    def set_behavior(self, behavior: str) -> None:
        _StubInpaintHandler.behavior = behavior

    def close(self):
        self.httpd.shutdown()
        self.httpd.server_close()


@pytest.fixture
def stub_inpaint_server():
    server = StubInpaintServer()
    server.set_behavior("ok")
    yield server
    server.set_behavior("ok")
    server.close()
