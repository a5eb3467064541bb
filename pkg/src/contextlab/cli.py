"""Command-line entry point: ``contextlab {sweep,verify,calibrate}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace

from .errors import CalibrationError, ConfigError
from .harness.config import MAX_SEED, load_spec, parse_angle
from .harness.output import emit
from .harness.sweep import run_sweep, summarize

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_CALIBRATION = 2
EXIT_INVARIANT = 3

log = logging.getLogger("contextlab")


def _seed(text: str) -> int:
    value = int(text)
    if not 0 <= value <= MAX_SEED:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="contextlab", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    sweep = sub.add_parser("sweep", help="run a parameter sweep from a config file")
    sweep.add_argument("--config", required=True)
    sweep.add_argument("--out", default="contextlab_out", help="output directory")
    sweep.add_argument("--seed", type=_seed, help="overrides the config file and CONTEXTLAB_SEED")
    sweep.add_argument("--workers", type=_positive, default=1)

    sub.add_parser("verify", help="run the built-in invariant suite")

    cal = sub.add_parser("calibrate", help="print the arm-1 calibration phase")
    cal.add_argument("--vartheta", required=True, help="probe splitter angle (radians or NNdeg)")
    cal.add_argument("--flip-arm", choices=("arm1", "arm2"), default="arm2")
    return parser


def cmd_sweep(args) -> int:
    spec = load_spec(args.config)
    if args.seed is not None:
        spec = replace(spec, seed=args.seed)
    rows, manifest = run_sweep(spec, workers=args.workers)
    files = emit(rows, manifest, spec.output_format, args.out, spec.emit_curves)
    for path in files:
        log.info("wrote %s", path)
    print(json.dumps(summarize(rows).to_dict(), indent=1))
    return EXIT_OK


def cmd_verify(args) -> int:
    from .harness.verify import run_all

    results, summary = run_all()
    for res in results:
        print(res.line())
    print(json.dumps(summary.to_dict(), indent=1))
    return EXIT_OK if all(r.passed for r in results) else EXIT_INVARIANT


def cmd_calibrate(args) -> int:
    from .interferometer import calibrate_phase

    phase = calibrate_phase(parse_angle(args.vartheta), flip_arm=args.flip_arm)
    print(format(phase, ".17g"))
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    handlers = {"sweep": cmd_sweep, "verify": cmd_verify, "calibrate": cmd_calibrate}
    try:
        return handlers[args.command](args)
    except CalibrationError as exc:
        print(f"calibration failed: {exc}", file=sys.stderr)
        return EXIT_CALIBRATION
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
