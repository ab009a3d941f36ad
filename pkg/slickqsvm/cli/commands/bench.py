from argparse import ArgumentParser, Namespace
from pathlib import Path

from slickqsvm.cli.api import CommandRouter
from slickqsvm.cli.options import (
    add_ensemble_arguments,
    add_preprocess_arguments,
    add_sampling_arguments,
    add_training_arguments,
    ensemble_config,
    preprocess_config,
    sampling_config,
    training_config,
)
from slickqsvm.core.exceptions import ValidationException
from slickqsvm.models.schemas import BACKENDS
from slickqsvm.services.pipeline import BenchService
from slickqsvm.services.registry import Registry

router = CommandRouter()


def add_arguments(parser: ArgumentParser) -> None:
    parser.add_argument("--manifest", required=True, help="dataset manifest JSON")
    parser.add_argument("--backends", nargs="+", choices=BACKENDS, default=list(BACKENDS), help="rows to produce")
    parser.add_argument("--model", action="append", default=None, metavar="BACKEND=PATH",
                        help="model to use for a backend (repeatable)")
    parser.add_argument("--train-first", action="store_true", default=False,
                        help="train every backend without an explicit --model before benchmarking")
    parser.add_argument("--out-dir", default="bench", help="where --train-first writes models")
    parser.add_argument("--split", choices=("train", "val", "test"), default="test", help="split to score")
    parser.add_argument("--repeat", type=int, default=1, help="prediction passes averaged for timing")
    parser.add_argument("--output", default=None, help="write the Markdown table here instead of stdout")
    parser.add_argument("--figures", default=None, metavar="DIR",
                        help="also write a SAR / truth / per-backend mask panel PNG per scene into DIR")
    add_ensemble_arguments(parser, with_backend=False)
    add_preprocess_arguments(parser)
    add_sampling_arguments(parser)
    add_training_arguments(parser)


def parse_model_flags(values) -> dict:
    models = {}
    for value in values or ():
        backend, sep, path = value.partition("=")
        if not sep or backend not in BACKENDS or not path:
            raise ValidationException(f"--model expects BACKEND=PATH with BACKEND in {BACKENDS}, got '{value}'")
        models[backend] = path
    return models


@router.command("bench", help="Benchmark backends side by side as a Markdown table", arguments=add_arguments)
def bench(args: Namespace, registry: Registry) -> dict:
    service = BenchService(args.working_size, args.threads, registry)
    model_paths = service.resolve_models(
        args.manifest,
        args.backends,
        parse_model_flags(args.model),
        args.train_first,
        args.out_dir,
        ensemble_config(args),
        training_config(args),
        preprocess_config(args),
        sampling_config(args),
    )
    _, table = service.run(args.manifest, model_paths, split=args.split, repeat=args.repeat)
    if args.output:
        path = Path(args.output)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(table, encoding="utf-8")
    else:
        print(table, end="")
    if args.figures:
        service.figures(args.manifest, model_paths, args.figures, split=args.split)
    return {}
