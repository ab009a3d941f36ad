import json
import logging
import sys
import time
from argparse import Namespace
from pathlib import Path
from typing import List, Optional

from slickqsvm.cli.api import build_parser
from slickqsvm.core.exceptions import CustomException, NotFoundException, ValidationException
from slickqsvm.core.logging import configure_logging
from slickqsvm.services.registry import Registry

logger = logging.getLogger("slickqsvm")

_NOT_CONFIGURABLE = {"help", "config", "command", "handler"}


def _dests(parser) -> set:
    return {action.dest for action in parser._actions} - _NOT_CONFIGURABLE


def load_config_file(path) -> dict:
    """Flat JSON object of flag values; keys may use dashes or underscores"""
    path = Path(path)
    if not path.is_file():
        raise NotFoundException(f"Config file '{path}' does not exist")
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValidationException(f"Config file '{path}' is not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ValidationException(f"Config file '{path}' must hold a JSON object")
    return {key.lstrip("-").replace("-", "_"): value for key, value in raw.items()}


def parse_args(argv: Optional[List[str]] = None) -> Namespace:
    """
    Parse the command line. A --config file supplies defaults for the chosen command,
    so explicit flags override it and it overrides the environment.
    """
    parser, subparsers = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        values = load_config_file(args.config)
        global_dests, command_dests = _dests(parser), _dests(subparsers[args.command])
        unknown = sorted(set(values) - global_dests - command_dests)
        if unknown:
            raise ValidationException(
                f"Unknown keys for '{args.command}' in config file '{args.config}': {', '.join(unknown)}"
            )
        parser.set_defaults(**{k: v for k, v in values.items() if k in global_dests and k not in command_dests})
        subparsers[args.command].set_defaults(**{k: v for k, v in values.items() if k in command_dests})
        args = parser.parse_args(argv)
    if args.threads < 1:
        raise ValidationException(f"--threads must be >= 1, got {args.threads}")
    return args


def resolved_config(args: Namespace) -> dict:
    return {key: value for key, value in sorted(vars(args).items()) if key not in ("handler", "config")}


def run(argv: Optional[List[str]] = None) -> int:
    """Run one command; returns the process exit code"""
    try:
        args = parse_args(argv)
    except CustomException as exc:
        configure_logging()
        logger.error(exc.detail)
        return exc.exit_code

    configure_logging(args.log_level)
    config = resolved_config(args)
    logger.info("Resolved configuration: %s", json.dumps(config, sort_keys=True, default=str))

    registry = Registry(url=args.registry_url, enabled=args.registry)
    started = time.perf_counter()
    try:
        outcome = args.handler(args, registry) or {}
    except CustomException as exc:
        logger.error("%s failed: %s", args.command, exc.detail)
        registry.record_run(args.command, "failed", details={**config, "error": exc.detail},
                            duration_seconds=time.perf_counter() - started)
        return exc.exit_code
    except Exception as exc:
        logger.exception("%s failed unexpectedly", args.command)
        registry.record_run(args.command, "failed", details={**config, "error": repr(exc)},
                            duration_seconds=time.perf_counter() - started)
        return 1

    duration = time.perf_counter() - started
    registry.record_run(args.command, "ok", backend=outcome.get("backend"), model_id=outcome.get("model_id"),
                        details=config, duration_seconds=duration)
    logger.info("%s finished in %.2fs", args.command, duration)
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
