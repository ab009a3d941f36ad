from argparse import ArgumentParser, Namespace
from pathlib import Path

from slickqsvm.cli.api import CommandRouter
from slickqsvm.core.exceptions import ValidationException
from slickqsvm.io.model_file import load_model
from slickqsvm.io.scene_io import load_manifest
from slickqsvm.models.schemas import BACKENDS, ManifestEntry
from slickqsvm.services.pipeline import PredictionService, select_entries
from slickqsvm.services.registry import Registry

router = CommandRouter()


def add_arguments(parser: ArgumentParser) -> None:
    parser.add_argument("--model", required=True, help="model file")
    parser.add_argument("--manifest", default=None, help="predict the scenes of this manifest")
    parser.add_argument("--split", choices=("train", "val", "test"), default=None,
                        help="only this split of --manifest")
    parser.add_argument("--scene", nargs=2, action="append", metavar=("VV", "VH"), default=None,
                        help="a scene given by its VV and VH rasters (repeatable)")
    parser.add_argument("--out-dir", required=True, help="directory for <scene>_mask.png")
    parser.add_argument("--backend", choices=BACKENDS, default=None, help="fail unless the model has this backend")


def scene_entries(args: Namespace):
    entries = []
    if args.manifest:
        entries.extend(select_entries(load_manifest(args.manifest).entries, args.split))
    for vv, vh in args.scene or ():
        entries.append(ManifestEntry(scene_id=Path(vv).stem, vv_path=vv, vh_path=vh, split="test"))
    if not entries:
        raise ValidationException("Give --manifest or at least one --scene VV VH")
    return entries


@router.command("predict", help="Write a segmentation mask PNG per scene", arguments=add_arguments)
def predict(args: Namespace, registry: Registry) -> dict:
    model = load_model(args.model)
    results = PredictionService(args.working_size).predict(model, scene_entries(args), args.out_dir, args.backend)
    for result in results:
        print(f"{result.scene_id}\t{result.path}\t{result.seconds:.3f}s")
    return {"backend": model.backend, "model_id": model.model_id}
