"""``ecgdenoise`` command line.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
The config file comes from ``--config`` or the ``ECGDENOISE_CONFIG``
environment variable; command-line flags override its fields.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from . import experiment as ex
from .autoencoder import CheckpointError, NumericalError
from .filters import PRESET_NAMES, FilterError
from .noise import NoiseError
from .segment import SegmentError

CONFIG_ENV = "ECGDENOISE_CONFIG"
EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERICAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _json_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help=f"JSON experiment config (default: ${CONFIG_ENV})")
    p.add_argument("--output-dir", help="run directory")
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override a config field, e.g. training.epochs=5 (value parsed as JSON)")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ecgdenoise", description="Synthetic ECG denoising benchmark.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("synth", help="generate the clean synthetic corpus")
    _common(p)
    p.add_argument("--n-segments", type=int)

    p = sub.add_parser("build-dataset", help="build (noisy, clean) pairs for each split")
    _common(p)
    p.add_argument("--split", action="append", help="only this split (repeatable)")
    p.add_argument("--menu", help="noise kinds, e.g. SineWander-LinearWander")
    p.add_argument("--clean-clean-fraction", type=float)

    p = sub.add_parser("train", help="train the autoencoder on the training split")
    _common(p)
    p.add_argument("--epochs", type=int)
    p.add_argument("--checkpoint")

    for name, text in (("denoise", "denoise the evaluation split"),
                       ("eval-signal", "waveform metrics after denoising"),
                       ("eval-delineation", "delineation errors after denoising"),
                       ("report", "summary tables from the evaluations"),
                       ("pipeline", "run every stage in order")):
        p = sub.add_parser(name, help=text)
        _common(p)
        p.add_argument("--method", action="append",
                       help="denoiser: 'autoencoder' or a filter preset (repeatable)")
        p.add_argument("--checkpoint")
        if name == "pipeline":
            p.add_argument("--n-segments", type=int)
            p.add_argument("--epochs", type=int)
            p.add_argument("--menu")

    p = sub.add_parser("plot", help="SVG of one evaluation pair with its delineation")
    _common(p)
    p.add_argument("--pair", help="pair ID (default: first pair of the evaluation split)")
    p.add_argument("--method", help="'input', 'target', 'autoencoder' or a preset name")
    p.add_argument("--leads", help="comma-separated leads to draw")
    p.add_argument("--checkpoint")
    return parser


def load_config(args) -> ex.ExperimentConfig:
    path = args.config or os.environ.get(CONFIG_ENV)
    cfg = ex.ExperimentConfig.load(path) if path else ex.ExperimentConfig()
    overrides = {}
    for item in args.set:
        if "=" not in item:
            raise UsageError(f"--set expects KEY=VALUE, got {item!r}")
        key, value = item.split("=", 1)
        overrides[key.strip()] = _json_value(value)
    flag_fields = {"output_dir": "output_dir", "seed": "master_seed",
                   "n_segments": "n_segments", "clean_clean_fraction": "clean_clean_fraction",
                   "checkpoint": "checkpoint", "epochs": "training.epochs",
                   "menu": "noise.menu"}
    for attr, key in flag_fields.items():
        value = getattr(args, attr, None)
        if value is not None:
            overrides[key] = value
    method = getattr(args, "method", None)
    if isinstance(method, list):
        overrides["denoisers"] = method
    return cfg.with_overrides(overrides) if overrides else cfg


def _run(args, cfg: ex.ExperimentConfig) -> list:
    cmd = args.command
    if cmd == "synth":
        return [ex.stage_synth(cfg)]
    if cmd == "build-dataset":
        return list(ex.stage_build_dataset(cfg, args.split).values())
    if cmd == "train":
        return [ex.stage_train(cfg)]
    if cmd == "denoise":
        return list(ex.stage_denoise(cfg).values())
    if cmd == "eval-signal":
        return [ex.stage_eval_signal(cfg)]
    if cmd == "eval-delineation":
        return [ex.stage_eval_delineation(cfg)]
    if cmd == "report":
        return ex.stage_report(cfg)
    if cmd == "plot":
        method = args.method
        if method not in (None, "input", "target", ex.AUTOENCODER) and method not in PRESET_NAMES:
            raise UsageError(f"unknown method {method!r}")
        leads = args.leads.split(",") if args.leads else None
        return [ex.stage_plot(cfg, args.pair, method, leads)]
    if cmd == "pipeline":
        return ex.stage_pipeline(cfg)
    raise UsageError(f"unknown command {cmd!r}")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args)
        for path in _run(args, cfg):
            print(path)
    except (UsageError, ex.ConfigError) as exc:
        print(f"ecgdenoise: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"ecgdenoise: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ex.DataError, SegmentError, NoiseError, CheckpointError, FilterError,
            OSError, ValueError) as exc:
        print(f"ecgdenoise: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
