"""
Event Detection - Main Entry Point

Command-line interface over the detection pipeline. Each subcommand runs one
stage; `pipeline` runs them all over the same output directory.

Usage:
    python src/main.py synth --out data --n-events 10 --event-width 20
    python src/main.py pipeline --series data/series.csv --events data/events.csv --w 21
    python src/main.py detect --series s.csv --events e.csv --sigma 2 --threshold 0.5
    python src/main.py eval --series s.csv --predicted a.csv --truth b.csv
    python src/main.py config

Configuration precedence (lowest first): built-in defaults, --preset, flags,
--config JSON file. The effective configuration is written to
<out>/run_config.json.

Exit codes:
    0  success
    2  invalid input or configuration (missing file, bad format, bad value)
    3  numerical failure or any other detection error

License: MIT
"""

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

# Add src to path if needed
sys.path.insert(0, str(Path(__file__).parent))

import config
from config import RunConfig, SynthConfig
from observability import configure_logging, get_logger
from pipeline import (
    ARTIFACTS,
    cmd_detect,
    cmd_eval,
    cmd_label,
    cmd_pipeline,
    cmd_synth,
    cmd_train,
    cmd_tune,
    write_run_config,
)
from utils.errors import ConfigError, EventDetectionError, ValidationError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID_INPUT = 2
EXIT_FAILURE = 3


def _run_arguments() -> argparse.ArgumentParser:
    """Flags shared by every run command; dest names match RunConfig fields."""
    parser = argparse.ArgumentParser(add_help=False)
    data = parser.add_argument_group("data")
    data.add_argument("--series", help="Input series file (CSV with a time column)")
    data.add_argument("--events", help="Ground-truth events file (start,end)")
    data.add_argument("--label-column", dest="label_column", help="Binary label column in the series file")
    data.add_argument("--time-column", dest="time_column")
    data.add_argument("--feature-columns", dest="feature_columns", nargs="+")
    data.add_argument("--train-fraction", dest="train_fraction", type=float)

    model = parser.add_argument_group("model")
    model.add_argument("--w", type=int, help="Window size in steps")
    model.add_argument("--hidden-units", dest="hidden_units", type=int)
    model.add_argument("--activation", choices=("sigmoid", "tanh"))
    model.add_argument("--no-scaling", dest="scale_inputs", action="store_const", const=False)

    training = parser.add_argument_group("training")
    training.add_argument("--epochs", type=int)
    training.add_argument("--batch-size", dest="batch_size", type=int)
    training.add_argument("--learning-rate", dest="learning_rate", type=float)
    training.add_argument("--optimizer", choices=config.OPTIMIZERS)
    training.add_argument("--validation-fraction", dest="validation_fraction", type=float)
    training.add_argument("--seed", type=int)
    training.add_argument(
        "--keep-last-epoch", dest="restore_best", action="store_const", const=False,
        help="Keep the final weights instead of the best-validation epoch",
    )

    detection = parser.add_argument_group("detection")
    detection.add_argument("--sigma", type=float, help="Fixed smoothing sigma (skips tuning with --threshold)")
    detection.add_argument("--radius", type=int)
    detection.add_argument("--threshold", type=float)
    detection.add_argument("--sigmas", nargs="+", type=float, help="Tuning grid sigmas")
    detection.add_argument("--radii", nargs="+", type=int, help="Tuning grid radii (default ceil(3 sigma))")
    detection.add_argument("--thresholds", nargs="+", type=float, help="Tuning grid thresholds")
    detection.add_argument("--tolerance", type=float, help="Matching tolerance in seconds (default w_s)")
    detection.add_argument("--workers", type=int, help="Tuning threads")

    parser.add_argument("--out", help="Output directory")
    parser.add_argument("--preset", choices=sorted(config.PRESETS))
    parser.add_argument("--config", dest="config_file", help="JSON configuration file (overrides flags)")
    parser.add_argument("--log-level", dest="log_level")
    return parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eventdet",
        description="Regression-based event detection in multivariate time series",
    )
    commands = parser.add_subparsers(dest="command", required=True)
    shared = _run_arguments()

    commands.add_parser("label", parents=[shared], help="Write the ground-truth op series")
    commands.add_parser("train", parents=[shared], help="Train the regressor on the training region")
    tune_parser = commands.add_parser("tune", parents=[shared], help="Grid-search smoothing and threshold")
    tune_parser.add_argument("--model", dest="model_path")
    detect_parser = commands.add_parser("detect", parents=[shared], help="Detect events in the test region")
    detect_parser.add_argument("--model", dest="model_path")
    eval_parser = commands.add_parser("eval", parents=[shared], help="Match predicted against true events")
    eval_parser.add_argument("--predicted", dest="predicted_path")
    eval_parser.add_argument("--truth", dest="truth_path")
    commands.add_parser("pipeline", parents=[shared], help="label, train, tune, detect and eval in one run")

    synth = commands.add_parser("synth", help="Generate a synthetic dataset")
    synth.add_argument("--out", default="out")
    synth.add_argument("--n-steps", dest="n_steps", type=int)
    synth.add_argument("--spacing", type=float)
    synth.add_argument("--n-features", dest="n_features", type=int)
    synth.add_argument("--n-events", dest="n_events", type=int)
    synth.add_argument("--signature", dest="event_signature", choices=config.SIGNATURES)
    synth.add_argument("--amplitude", type=float)
    synth.add_argument("--noise-std", dest="noise_std", type=float)
    synth.add_argument("--min-event-gap", dest="min_event_gap", type=float)
    synth.add_argument("--event-width", dest="event_width", type=float)
    synth.add_argument("--seed", type=int)
    synth.add_argument("--config", dest="config_file", help="JSON file of SynthConfig fields")
    synth.add_argument("--log-level", dest="log_level")

    commands.add_parser("config", parents=[shared], help="Show the effective configuration")
    return parser


def _read_config_file(path: Optional[str]) -> Dict[str, Any]:
    if not path:
        return {}
    config_path = Path(path)
    if not config_path.exists():
        raise FileNotFoundError(f"config file not found: {config_path}")
    try:
        raw = json.loads(config_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ConfigError(f"{config_path}: invalid JSON ({e})")
    if not isinstance(raw, dict):
        raise ConfigError(f"{config_path}: expected a JSON object")
    return raw


def resolve_run_config(args: argparse.Namespace) -> RunConfig:
    """defaults < preset < flags < config file."""
    run = config.default_run_config()
    if args.preset:
        run = run.merged(config.get_preset(args.preset))
    fields = {f.name for f in dataclasses.fields(RunConfig)}
    flags = {key: value for key, value in vars(args).items() if key in fields}
    run = run.merged(flags)
    run = run.merged(_read_config_file(args.config_file))
    run.validate()
    return run


def resolve_synth_config(args: argparse.Namespace) -> SynthConfig:
    fields = {f.name for f in dataclasses.fields(SynthConfig)}
    changes = {key: value for key, value in vars(args).items() if key in fields and value is not None}
    file_values = _read_config_file(args.config_file)
    unknown = sorted(set(file_values) - fields)
    if unknown:
        raise ConfigError(f"unknown synth configuration key(s): {', '.join(unknown)}")
    synth = dataclasses.replace(SynthConfig(), **{**changes, **file_values})
    synth.validate()
    return synth


def _dispatch(args: argparse.Namespace) -> None:
    if args.command == "synth":
        configure_logging(args.log_level)
        cmd_synth(resolve_synth_config(args), args.out)
        return

    run = resolve_run_config(args)
    if args.command == "config":
        config.print_config_summary(run)
        return

    out = Path(run.out)
    configure_logging(args.log_level, out / config.OBSERVABILITY.log_file_name)
    write_run_config(run, out / ARTIFACTS["run_config"])
    obs = get_logger()
    try:
        if args.command == "label":
            cmd_label(run)
        elif args.command == "train":
            cmd_train(run)
        elif args.command == "tune":
            cmd_tune(run, args.model_path)
        elif args.command == "detect":
            cmd_detect(run, args.model_path)
        elif args.command == "eval":
            cmd_eval(run, args.predicted_path, args.truth_path)
        else:
            cmd_pipeline(run)
            obs.print_summary()
    finally:
        obs.save_metrics(out / config.OBSERVABILITY.metrics_file_name)


def main(argv: Optional[List[str]] = None) -> int:
    """
    Run one CLI command.

    Returns:
        int: Exit code (0 success, 2 invalid input, 3 other failure)
    """
    args = build_parser().parse_args(argv)
    try:
        _dispatch(args)
    except (ValidationError, FileNotFoundError) as e:
        logger.error(f"✗ {type(e).__name__}: {e}")
        return EXIT_INVALID_INPUT
    except EventDetectionError as e:
        logger.error(f"✗ {type(e).__name__}: {e}")
        return EXIT_FAILURE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
