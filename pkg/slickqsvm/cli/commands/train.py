from argparse import ArgumentParser, Namespace

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
from slickqsvm.services.pipeline import TrainingService, training_report_path
from slickqsvm.services.registry import Registry

router = CommandRouter()


def add_arguments(parser: ArgumentParser) -> None:
    parser.add_argument("--manifest", required=True, help="dataset manifest JSON (train split is used)")
    parser.add_argument("--model-out", required=True, help="model file to write")
    add_ensemble_arguments(parser)
    add_preprocess_arguments(parser)
    add_sampling_arguments(parser)
    add_training_arguments(parser)


@router.command("train", help="Train a bagged SVM ensemble on the manifest's train split", arguments=add_arguments)
def train(args: Namespace, registry: Registry) -> dict:
    service = TrainingService(args.working_size, args.threads, registry)
    model, report = service.train(
        args.manifest,
        args.model_out,
        ensemble_config(args),
        training_config(args),
        preprocess_config(args),
        sampling_config(args),
    )
    print(f"{args.model_out}\t{model.backend}\t{model.model_id}\t{model.n_learners} learners"
          f"\t{report.train_seconds:.2f}s\treport {training_report_path(args.model_out)}")
    return {"backend": model.backend, "model_id": model.model_id}
