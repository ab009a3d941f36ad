"""
Flag groups shared by several commands and their translation into config models.
Unset flags stay None so the config models supply their defaults.
"""
from argparse import ArgumentParser, Namespace
from typing import Dict, Iterable

from slickqsvm.models.schemas import (
    AGGREGATION_RULES,
    BACKENDS,
    AnnealConfig,
    BinaryEncoding,
    EnsembleConfig,
    GateKernelSpec,
    KernelSpec,
    PreprocessConfig,
    SamplingConfig,
    SvmTrainConfig,
    TrainingConfig,
    parse_config,
)


def picked(args: Namespace, names: Iterable[str], renames: Dict[str, str] = None) -> dict:
    renames = renames or {}
    values = {}
    for name in names:
        value = getattr(args, name, None)
        if value is not None:
            values[renames.get(name, name)] = value
    return values


def add_preprocess_arguments(parser: ArgumentParser) -> None:
    group = parser.add_argument_group("preprocessing")
    group.add_argument("--median-window", type=int, default=None, help="odd median filter window (3)")
    group.add_argument("--clip", type=float, nargs=2, metavar=("LOW", "HIGH"), default=None,
                       help="clip percentiles (1 99)")
    group.add_argument("--gamma", type=float, default=None, help="gamma exponent (1.0)")
    group.add_argument("--gamma-sweep", action="store_const", const=True, default=None,
                       help="pick the gamma with the widest p10-p90 spread per scene")
    group.add_argument("--no-land-mask", dest="apply_land_mask", action="store_const", const=False,
                       default=None, help="ignore land masks")


def preprocess_config(args: Namespace) -> PreprocessConfig:
    values = picked(args, ("median_window", "gamma", "gamma_sweep", "apply_land_mask"))
    if getattr(args, "clip", None) is not None:
        values["clip_low_pct"], values["clip_high_pct"] = args.clip
    return parse_config(PreprocessConfig, values)


def add_sampling_arguments(parser: ArgumentParser) -> None:
    group = parser.add_argument_group("pixel sampling")
    group.add_argument("--max-oil", type=int, default=None, help="oil pixels per scene (25)")
    group.add_argument("--max-water", type=int, default=None, help="water pixels per scene (25)")
    group.add_argument("--hard-negative-fraction", type=float, default=None,
                       help="share of water drawn from the darkest pixels (0.5)")
    group.add_argument("--dark-percentile", type=float, default=None,
                       help="VV percentile bounding hard negatives (10)")


def sampling_config(args: Namespace) -> SamplingConfig:
    return parse_config(
        SamplingConfig,
        picked(args, ("max_oil", "max_water", "hard_negative_fraction", "dark_percentile")),
    )


def add_ensemble_arguments(parser: ArgumentParser, with_backend: bool = True) -> None:
    group = parser.add_argument_group("ensemble")
    if with_backend:
        group.add_argument("--backend", choices=BACKENDS, default=None, help="training backend (classical)")
    group.add_argument("--n-learners", type=int, default=None, help="requested weak learners (500)")
    group.add_argument("--subset-size", type=int, default=None, help="samples per learner (40)")
    group.add_argument("--aggregation", choices=AGGREGATION_RULES, default=None,
                       help="decision aggregation rule (mean_decision)")


def ensemble_config(args: Namespace) -> EnsembleConfig:
    values = picked(args, ("backend", "n_learners", "subset_size", "aggregation"))
    values["seed"] = args.seed
    return parse_config(EnsembleConfig, values)


def add_training_arguments(parser: ArgumentParser) -> None:
    group = parser.add_argument_group("learner training")
    group.add_argument("--box-c", type=float, default=None, help="SVM box constraint C (3)")
    group.add_argument("--smo-tol", type=float, default=None, help="SMO KKT tolerance (1e-3)")
    group.add_argument("--smo-max-passes", type=int, default=None, help="SMO update budget per sample (50)")
    group.add_argument("--rbf-gamma", type=float, default=None, help="RBF kernel width (1.0)")
    group.add_argument("--angle-scale", type=float, default=None, help="gate kernel rotation scale (pi)")
    group.add_argument("--gate-evaluation", choices=("closed_form", "statevector"), default=None,
                       help="gate kernel evaluation (closed_form)")
    group.add_argument("--bits-per-alpha", type=int, default=None, help="QUBO bits per coefficient (2)")
    group.add_argument("--encoding-base", type=int, default=None, help="QUBO encoding base (2)")
    group.add_argument("--penalty", type=float, default=None, help="QUBO equality penalty xi (1.0)")
    group.add_argument("--num-reads", type=int, default=None, help="annealing reads (1000)")
    group.add_argument("--top-samples", type=int, default=None, help="lowest-energy reads averaged (20)")
    group.add_argument("--sweeps-per-read", type=int, default=None, help="Metropolis sweeps per read (1000)")
    group.add_argument("--beta-min", type=float, default=None, help="initial inverse temperature (0.1)")
    group.add_argument("--beta-max", type=float, default=None, help="final inverse temperature (10)")
    group.add_argument("--no-final-quench", dest="final_quench", action="store_const", const=False,
                       default=None, help="skip the zero-temperature descent after each read")


def training_config(args: Namespace) -> TrainingConfig:
    angle = picked(args, ("angle_scale",))
    svm = parse_config(SvmTrainConfig, picked(args, ("box_c", "smo_tol", "smo_max_passes"), {"box_c": "box_C"}))
    kernel = parse_config(KernelSpec, {**picked(args, ("rbf_gamma",)), **angle})
    encoding = parse_config(
        BinaryEncoding,
        picked(args, ("bits_per_alpha", "encoding_base", "penalty"), {"encoding_base": "base"}),
    )
    anneal = parse_config(
        AnnealConfig,
        {**picked(args, ("num_reads", "top_samples", "sweeps_per_read", "beta_min", "beta_max", "final_quench")),
         "seed": args.seed},
    )
    gate = parse_config(GateKernelSpec, {**picked(args, ("gate_evaluation",), {"gate_evaluation": "evaluation"}),
                                         **angle})
    return TrainingConfig(svm=svm, kernel=kernel, encoding=encoding, anneal=anneal, gate=gate)
