"""Command-line entry point.

    commentrank <stage> -c run.cfg [--set key=value ...]
    commentrank all -c run.cfg
    commentrank synth OUT_DIR [--threads N] [--comments N] [--noise X] [--seed S]

Exit codes: 0 success, 1 invalid configuration or missing upstream artifact,
2 runtime failure.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .config import ConfigError, build_config
from .pipeline import RUNNERS, STAGES, MissingArtifact, StageInputError, run_all
from .synth import SynthConfig, generate

logger = logging.getLogger("commentrank")

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="commentrank", description=__doc__.split("\n")[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    for stage in STAGES + ("all",):
        sp = sub.add_parser(stage, help=f"run the {stage} stage" if stage != "all" else "run every stage")
        sp.add_argument("-c", "--config", help="flat key = value config file")
        sp.add_argument("-s", "--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override a config key (repeatable)")
    sp = sub.add_parser("synth", help="generate a synthetic community with known ground truth")
    sp.add_argument("out_dir")
    sp.add_argument("--threads", type=int, default=200, dest="n_threads")
    sp.add_argument("--comments", type=int, default=20)
    sp.add_argument("--noise", type=float, default=0.1)
    sp.add_argument("--seed", type=int, default=42)
    sp.add_argument("--subreddit", default="synthetic")
    sp.add_argument("--weight", action="append", default=[], metavar="FEATURE=W",
                    help="planted weight (repeatable; replaces the defaults)")
    return p


def _synth(args) -> int:
    weights = None
    if args.weight:
        weights = {}
        for item in args.weight:
            name, _, value = item.partition("=")
            weights[name.strip()] = float(value)
    cfg = SynthConfig(args.n_threads, args.comments, noise=args.noise, seed=args.seed, subreddit=args.subreddit)
    if weights is not None:
        cfg.weights = weights
    try:
        cfg.validate()
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    result = generate(cfg, args.out_dir)
    print(f"wrote {len(result.scores)} comments to {result.directory} (config: {result.directory / 'run.cfg'})")
    return EXIT_OK


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "synth":
        return _synth(args)
    try:
        cfg = build_config(args.config, args.set)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    try:
        if args.command == "all":
            run_all(cfg)
        else:
            RUNNERS[args.command](cfg)
    except (MissingArtifact, StageInputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as exc:  # noqa: BLE001
        logger.exception("stage %s failed", args.command)
        print(f"error: {args.command} failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
