from argparse import ArgumentParser, Namespace

from slickqsvm.cli.api import CommandRouter
from slickqsvm.cli.options import picked
from slickqsvm.engine.synthetic import MANIFEST_NAME, generate_synthetic_dataset
from slickqsvm.models.schemas import SynthConfig, parse_config
from slickqsvm.services.registry import Registry

router = CommandRouter()


def add_arguments(parser: ArgumentParser) -> None:
    parser.add_argument("--out-dir", required=True, help="dataset directory (scenes/ and manifest.json)")
    parser.add_argument("--n-scenes", type=int, default=None, help="scenes to generate (20)")
    parser.add_argument("--size", type=int, default=None, help="scene side in pixels (256)")
    parser.add_argument("--slick-count", type=int, nargs=2, metavar=("MIN", "MAX"), default=None,
                        help="slicks per scene (1 3)")
    parser.add_argument("--slick-axes", type=float, nargs=2, metavar=("MIN", "MAX"), default=None,
                        help="ellipse semi-axes as fractions of the size (0.05 0.2)")
    parser.add_argument("--slick-darkness", type=float, default=None, help="slick backscatter factor (0.3)")
    parser.add_argument("--speckle-looks", type=int, default=None, help="speckle looks (4)")
    parser.add_argument("--background-level", type=float, default=None, help="mean sea intensity (0.25)")
    parser.add_argument("--vh-ratio", type=float, default=None, help="VH/VV intensity ratio (0.2)")
    parser.add_argument("--land-probability", type=float, default=None, help="chance of a land strip (0)")
    parser.add_argument("--val-scenes", type=int, default=None, help="scenes assigned to val (0)")
    parser.add_argument("--test-scenes", type=int, default=None, help="scenes assigned to test (0)")


@router.command("synth", help="Generate a synthetic speckled-slick dataset", arguments=add_arguments)
def synth(args: Namespace, registry: Registry) -> dict:
    values = picked(
        args,
        ("n_scenes", "size", "slick_count", "slick_axes", "slick_darkness", "speckle_looks", "background_level",
         "vh_ratio", "land_probability", "val_scenes", "test_scenes"),
        {"slick_count": "slick_count_range", "slick_axes": "slick_axes_range"},
    )
    cfg = parse_config(SynthConfig, {**values, "seed": args.seed})
    manifest = generate_synthetic_dataset(cfg, args.out_dir)
    print(f"Wrote {len(manifest.entries)} scenes, manifest {args.out_dir}/{MANIFEST_NAME}")
    return {}
