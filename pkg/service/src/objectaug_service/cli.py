"""Service launcher: `objectaug-inpaint-service --checkpoint ... --input-size N --port P`."""

import argparse

import uvicorn

from .service import create_app


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="objectaug-inpaint-service")
    parser.add_argument("--checkpoint", required=True, help="model checkpoint path")
    parser.add_argument("--input-size", type=int, default=256, help="model grid size")
    parser.add_argument("--port", type=int, default=8008)
    parser.add_argument("--host", default="127.0.0.1")
    args = parser.parse_args(argv)

    app = create_app(args.checkpoint, args.input_size)
    state = app.state.service
    if not state.ready:
        print(f"warning: serving not-ready (503) state: {state.error}")
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
