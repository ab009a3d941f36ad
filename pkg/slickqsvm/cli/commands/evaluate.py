from argparse import ArgumentParser, Namespace

from slickqsvm.cli.api import CommandRouter
from slickqsvm.models.schemas import BACKENDS
from slickqsvm.services.pipeline import EvaluationService
from slickqsvm.services.registry import Registry

router = CommandRouter()


def add_arguments(parser: ArgumentParser) -> None:
    parser.add_argument("--model", required=True, help="model file")
    parser.add_argument("--manifest", required=True, help="dataset manifest JSON")
    parser.add_argument("--split", choices=("train", "val", "test"), default="test", help="split to score")
    parser.add_argument("--repeat", type=int, default=1, help="prediction passes averaged for timing")
    parser.add_argument("--report-json", default=None, help="write the report here instead of stdout")
    parser.add_argument("--report-csv", default=None, help="also write per-scene rows as CSV")
    parser.add_argument("--backend", choices=BACKENDS, default=None, help="fail unless the model has this backend")


@router.command("evaluate", help="Score a model against ground truth", arguments=add_arguments)
def evaluate(args: Namespace, registry: Registry) -> dict:
    report = EvaluationService(args.working_size).evaluate(
        args.model,
        args.manifest,
        split=args.split,
        repeat=args.repeat,
        expected_backend=args.backend,
        report_json=args.report_json,
        report_csv=args.report_csv,
    )
    if args.report_json is None:
        print(report.model_dump_json(indent=2))
    return {"backend": report.backend, "model_id": report.model_id}
