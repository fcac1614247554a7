"""
Experiment runner

    python -m app.cli train  --config exp.toml --seed 0 1 2 --out-dir runs
    python -m app.cli eval   --checkpoint runs/<run_id>/checkpoint.bin --shots 1 10 inf
    python -m app.cli sweep  --config exp.toml --axis tau --values 0.4 0.5 0.6
    python -m app.cli bounds --p 0.9 --delta 0.2 --n-classes 10 --target-error 0.01

Every ExperimentConfig field has a ``--field-name`` override. Exit codes:
0 success, 2 validation error, 3 data/format error, 4 numeric-domain error.
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Dict, Optional, Sequence

from pydantic import ValidationError

from app.core.config import settings
from app.core.exceptions import ConfigurationError, LabError
from app.schemas.bounds import BoundInputs
from app.schemas.experiment import ExperimentConfig, load_config, read_config_file
from app.services import bounds_service, evaluation_service, sweep_service, training_service

logger = logging.getLogger("app.cli")

# fields with dedicated common flags
_COMMON_FIELDS = {"seeds": "seed", "out_dir": "out_dir", "threads": "threads"}
_LIST_FIELDS = {"shots"}
_BOUND_FLAGS = {
    "p": "p",
    "delta": "delta_margin",
    "lipschitz": "lipschitz",
    "n_classes": "n_classes",
    "target_error": "target_error",
    "shots": "shots",
}


def _flag(name: str) -> str:
    return "--" + name.replace("_", "-")


def add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="TOML config file ([sections] of key = value)")
    parser.add_argument("--seed", type=int, nargs="+", help="one or more seeds")
    parser.add_argument("--out-dir", help="output directory")
    parser.add_argument("--threads", type=int, help="worker threads")
    parser.add_argument("--log-level", default=settings.LOG_LEVEL, help="logging level")


def add_config_flags(parser: argparse.ArgumentParser) -> None:
    """One override flag per config field; values are validated by the config schema."""
    for name, field in ExperimentConfig.model_fields.items():
        if name in _COMMON_FIELDS:
            continue
        kwargs: Dict[str, Any] = {"dest": name, "default": None, "help": field.description}
        if name in _LIST_FIELDS:
            kwargs["nargs"] = "+"
        parser.add_argument(_flag(name), **kwargs)


def config_overrides(args: argparse.Namespace) -> Dict[str, Any]:
    overrides = {
        name: getattr(args, name, None)
        for name in ExperimentConfig.model_fields
        if name not in _COMMON_FIELDS
    }
    overrides["seeds"] = args.seed
    overrides["out_dir"] = args.out_dir
    overrides["threads"] = args.threads
    return overrides


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="python -m app.cli", description=settings.APP_NAME)
    sub = parser.add_subparsers(dest="command", required=True)

    train = sub.add_parser("train", help="train one model per seed")
    add_common_flags(train)
    add_config_flags(train)

    evaluate = sub.add_parser("eval", help="evaluate a checkpoint")
    add_common_flags(evaluate)
    add_config_flags(evaluate)
    evaluate.add_argument("--checkpoint", required=True, help="checkpoint file written by train")
    evaluate.add_argument("--output", help="CSV destination (default: next to the checkpoint)")

    sweep = sub.add_parser("sweep", help="sweep one axis of a config")
    add_common_flags(sweep)
    add_config_flags(sweep)
    sweep.add_argument("--axis", required=True, choices=sorted(set(sweep_service.SWEEP_AXES)))
    sweep.add_argument("--values", required=True, nargs="+", help="axis values")
    sweep.add_argument("--output", help="CSV destination")

    bounds = sub.add_parser("bounds", help="shot-complexity comparison table")
    add_common_flags(bounds)
    bounds.add_argument("--p", type=float)
    bounds.add_argument("--delta", type=float, help="top-two margin")
    bounds.add_argument("--lipschitz", type=float)
    bounds.add_argument("--n-classes", type=int)
    bounds.add_argument("--target-error", type=float)
    bounds.add_argument("--shots", type=int)
    bounds.add_argument("--output", help="CSV destination")
    return parser


def bound_inputs(args: argparse.Namespace) -> BoundInputs:
    """Flags over the config file's bound keys."""
    values: Dict[str, Any] = {}
    if args.config:
        document = read_config_file(args.config)
        values.update({k: v for k, v in document.items() if k in BoundInputs.model_fields})
    for flag, name in _BOUND_FLAGS.items():
        value = getattr(args, flag)
        if value is not None:
            values[name] = value
    missing = [name for name in ("p", "delta_margin", "n_classes", "target_error") if name not in values]
    if missing:
        raise ConfigurationError(f"bounds: missing inputs {missing}")
    try:
        return BoundInputs(**values)
    except ValidationError as e:
        raise ConfigurationError(f"bounds: {e.errors()[0]['loc']}: {e.errors()[0]['msg']}")


def run_command(args: argparse.Namespace) -> int:
    if args.command == "bounds":
        report = bounds_service.run_bounds(bound_inputs(args), out_dir=args.out_dir or settings.OUTPUT_DIR, out_path=args.output)
        logger.info(f"N_yo={report.yomo_shots} N_va={report.vanilla_shots}")
        return 0

    config = load_config(args.config, config_overrides(args))
    if args.command == "train":
        results = training_service.run_train(config, out_dir=args.out_dir)
        for result in results:
            logger.info(f"{result.checkpoint.run_id}: checkpoint {result.checkpoint_path}, trace {result.trace_path}")
    elif args.command == "eval":
        out_path = args.output or (Path(args.out_dir) / evaluation_service.EVALUATION_FILE if args.out_dir else None)
        rows = evaluation_service.run_eval(args.checkpoint, config, out_path=out_path)
        logger.info(f"Wrote {len(rows)} evaluation rows")
    elif args.command == "sweep":
        rows = sweep_service.run_sweep(config, args.axis, args.values, out_path=args.output, out_dir=args.out_dir)
        logger.info(f"Wrote {len(rows)} sweep rows")
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    logging.basicConfig(
        level=getattr(logging, str(args.log_level).upper(), logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )
    try:
        return run_command(args)
    except LabError as e:
        logger.error(f"{e.error_code}: {e.message}")
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
