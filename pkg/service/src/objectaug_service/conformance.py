"""Wire-protocol conformance harness, runnable against any inpaint endpoint.

Checks health semantics, copy-through, dimension preservation, and the
400/503 error codes.  Works with anything exposing requests-style
``get``/``post`` (a ``requests.Session`` for live endpoints, a FastAPI
``TestClient`` in-process).
"""

import argparse
import base64
import io
import sys
from dataclasses import dataclass

import numpy as np
import requests
from PIL import Image


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


def _b64_png(array: np.ndarray, mode: str) -> str:
    buffer = io.BytesIO()
    Image.fromarray(array, mode=mode).save(buffer, format="PNG")
    return base64.b64encode(buffer.getvalue()).decode("ascii")


def _decode(payload: str) -> np.ndarray:
    return np.asarray(
        Image.open(io.BytesIO(base64.b64decode(payload))).convert("RGB"), dtype=np.uint8
    )


def _checkerboard(height: int, width: int) -> np.ndarray:
    ys, xs = np.mgrid[0:height, 0:width]
    board = ((ys // 4 + xs // 4) % 2).astype(np.uint8) * 255
    return np.stack([board, 255 - board, np.full_like(board, 31)], axis=2)


def run_conformance(client, base_url: str = "") -> list[CheckResult]:
    results: list[CheckResult] = []

    def check(name: str, passed: bool, detail: str = ""):
        results.append(CheckResult(name, bool(passed), detail))

    response = client.get(f"{base_url}/v1/health")
    health_ok = response.status_code == 200
    ready = False
    if health_ok:
        payload = response.json()
        health_ok = isinstance(payload.get("ready"), bool) and "model" in payload
        ready = bool(payload.get("ready"))
    check("health endpoint", health_ok, f"HTTP {response.status_code}")

    response = client.get(f"{base_url}/v1/no_such_route")
    check("unknown route 404", response.status_code == 404, f"HTTP {response.status_code}")

    image = _checkerboard(20, 32)
    empty_mask = np.zeros((20, 32), dtype=np.uint8)
    body = {"image": _b64_png(image, "RGB"), "mask": _b64_png(empty_mask, "L")}

    if not ready:
        response = client.post(f"{base_url}/v1/inpaint", json=body)
        check("503 while not ready", response.status_code == 503, f"HTTP {response.status_code}")
        return results

    response = client.post(f"{base_url}/v1/inpaint", json=body)
    ok = response.status_code == 200
    if ok:
        returned = _decode(response.json()["image"])
        ok = returned.shape == image.shape and bool((returned == image).all())
    check("copy-through on empty hole", ok, f"HTTP {response.status_code}")

    hole_mask = np.zeros((20, 32), dtype=np.uint8)
    hole_mask[6:14, 10:22] = 255
    body = {"image": _b64_png(image, "RGB"), "mask": _b64_png(hole_mask, "L")}
    response = client.post(f"{base_url}/v1/inpaint", json=body)
    ok = response.status_code == 200
    detail = f"HTTP {response.status_code}"
    if ok:
        returned = _decode(response.json()["image"])
        ok = returned.shape == image.shape
        detail = f"dims {returned.shape[:2]}"
        if ok:
            outside = hole_mask < 128
            ok = bool((returned[outside] == image[outside]).all())
            detail = "out-of-hole pixels bit-identical" if ok else "out-of-hole pixels changed"
    check("dimension preservation & out-of-hole exactness", ok, detail)

    small_mask = np.zeros((4, 4), dtype=np.uint8)
    body = {"image": _b64_png(image, "RGB"), "mask": _b64_png(small_mask, "L")}
    response = client.post(f"{base_url}/v1/inpaint", json=body)
    ok = response.status_code == 400 and "error" in response.json()
    check("400 on dimension mismatch", ok, f"HTTP {response.status_code}")

    response = client.post(f"{base_url}/v1/inpaint", json={"image": "!!not-b64!!", "mask": "!!"})
    ok = response.status_code == 400 and "error" in response.json()
    check("400 on undecodable payload", ok, f"HTTP {response.status_code}")

    return results


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="objectaug-inpaint-conformance")
    parser.add_argument("--endpoint", required=True, help="service base URL")
    parser.add_argument("--timeout", type=float, default=30.0)
    args = parser.parse_args(argv)

    session = requests.Session()
    session.request = _with_timeout(session.request, args.timeout)
    results = run_conformance(session, args.endpoint.rstrip("/"))
    failed = 0
    for result in results:
        status = "PASS" if result.passed else "FAIL"
        detail = f" ({result.detail})" if result.detail else ""
        print(f"[{status}] {result.name}{detail}")
        failed += 0 if result.passed else 1
    return 1 if failed else 0


def _with_timeout(request, timeout):
    def wrapped(method, url, **kwargs):
        kwargs.setdefault("timeout", timeout)
        return request(method, url, **kwargs)

    return wrapped


if __name__ == "__main__":
    raise SystemExit(main())
