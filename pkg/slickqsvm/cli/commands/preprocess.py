from argparse import ArgumentParser, Namespace

from slickqsvm.cli.api import CommandRouter
from slickqsvm.cli.options import (
    add_preprocess_arguments,
    add_sampling_arguments,
    preprocess_config,
    sampling_config,
)
from slickqsvm.services.pipeline import PreprocessService
from slickqsvm.services.registry import Registry

router = CommandRouter()


def add_arguments(parser: ArgumentParser) -> None:
    parser.add_argument("--manifest", required=True, help="dataset manifest JSON")
    parser.add_argument("--out-dir", required=True, help="directory for preprocessed VV/VH PNGs")
    parser.add_argument("--split", choices=("train", "val", "test"), default=None, help="only this split")
    parser.add_argument("--samples-csv", default=None, help="also export sampled training pixels to this CSV")
    add_preprocess_arguments(parser)
    add_sampling_arguments(parser)


@router.command("preprocess", help="Run the preprocessing chain and export preprocessed bands",
                arguments=add_arguments)
def preprocess(args: Namespace, registry: Registry) -> dict:
    service = PreprocessService(args.working_size, args.threads)
    gammas = service.run(
        args.manifest,
        args.out_dir,
        preprocess_config(args),
        split=args.split,
        samples_csv=args.samples_csv,
        sampling=sampling_config(args),
        seed=args.seed,
    )
    for scene_id, gamma in gammas.items():
        print(f"{scene_id}\tgamma={gamma:g}")
    return {}
