"""Command line entry point.

    objectaug run --images <dir> --masks <dir> --out <dir> [options]

Flags override config-file keys.  Exit codes: 0 success, 1 any sample
failed, 2 configuration error.
"""

import argparse
import sys
from pathlib import Path

from . import pipeline
from .errors import ObjectAugError, PairingError, ParseError, ValidationError
from .fill import FillVariant


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="objectaug")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="augment a dataset directory pair")
    run.add_argument("--config", type=Path, help="config file (key = value lines)")
    run.add_argument("--images", type=Path, required=True, help="input image directory")
    run.add_argument("--masks", type=Path, required=True, help="input mask directory")
    run.add_argument("--out", type=Path, required=True, help="output directory")
    run.add_argument("--seed", type=int, help="override run seed")
    run.add_argument("--multiplier", type=int, help="augmented copies per sample")
    run.add_argument("--fill", choices=[v.value for v in FillVariant], help="fill strategy")
    run.add_argument("--endpoint", help="external inpainting endpoint URL")
    run.add_argument("--workers", type=int, default=1, help="parallel sample workers")
    run.add_argument("--report", type=Path, help="write the run report JSON here")
    return parser


def _configure(args: argparse.Namespace) -> pipeline.PipelineConfig:
    if args.config is not None:
        config = pipeline.parse_config(args.config)
    else:
        config = pipeline.PipelineConfig()
    if args.seed is not None:
        config.seed = args.seed
    if args.multiplier is not None:
        config.multiplier = args.multiplier
    if args.fill is not None or args.endpoint is not None:
        name = args.fill if args.fill is not None else config.fill.variant.value
        endpoint = args.endpoint if args.endpoint is not None else config.fill.endpoint
        config.fill = pipeline.build_fill_strategy(
            name,
            endpoint=endpoint,
            diffusion_iters=config.fill.diffusion_iters,
            timeout=config.fill.timeout,
        )
    config.validate()
    return config


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = _configure(args)
    except (ParseError, ValidationError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2

    try:
        report = pipeline.augment_dataset(
            args.images, args.masks, args.out, config, workers=max(1, args.workers)
        )
    except (PairingError, ObjectAugError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    if args.report is not None:
        args.report.parent.mkdir(parents=True, exist_ok=True)
        args.report.write_text(report.to_json(), encoding="utf-8")
    print(
        f"samples {report.samples_in} -> {report.samples_out}, "
        f"objects augmented {report.objects_augmented}/{report.objects_seen}, "
        f"failures {len(report.failures)}, wall {report.wall_time_s:.2f}s"
    )
    for failure in report.failures:
        print(f"  failed {failure['id']}: {failure['error']}", file=sys.stderr)
    return 1 if report.failures else 0


if __name__ == "__main__":
    raise SystemExit(main())
