"""
Bagging: disjoint partitioning, per-backend learner training, and mask prediction
"""
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from slickqsvm.core.config import settings
from slickqsvm.core.exceptions import (
    BackendMismatchException,
    TrainingException,
    ValidationException,
)
from slickqsvm.engine.features import apply_scaler, extract_feature_image, fit_scaler, samples_to_arrays
from slickqsvm.engine.gate_kernel import quantum_kernel_matrix, train_gate_svm
from slickqsvm.engine.kernels import kernel_matrix
from slickqsvm.engine.qubo_annealer import train_weak_learner_annealed
from slickqsvm.engine.svm_core import smo_train
from slickqsvm.models.domain import (
    N_FEATURES,
    LabeledSample,
    ModelFile,
    SarScene,
    SegmentationMask,
    WeakLearner,
)
from slickqsvm.models.schemas import (
    EnsembleConfig,
    GateKernelSpec,
    KernelSpec,
    PreprocessConfig,
    SamplingConfig,
    TrainingConfig,
    TrainingReport,
)

logger = logging.getLogger(__name__)

BACKEND_KERNELS = {"classical": "rbf", "annealed": "rbf", "gate_kernel": "gate"}


# Partitioning

@dataclass
class PartitionPlan:
    subsets: List[List[LabeledSample]]
    built: int = 0
    repaired: int = 0
    dropped: int = 0
    discarded: int = 0


def _missing_class(labels: List[int]) -> Optional[int]:
    present = set(labels)
    if present == {1, -1}:
        return None
    return -1 if 1 in present else 1


def plan_partition(pool: Sequence[LabeledSample], cfg: EnsembleConfig) -> PartitionPlan:
    """
    Shuffle the pool with `cfg.seed`, cut floor(|pool| / subset_size) disjoint subsets (at most
    `n_learners`), then repair single-class subsets.

    Repair: the lowest-index donor holding at least two samples of the missing class gives its
    first such sample in exchange for the deficient subset's first sample. Subsets no donor can
    fix are dropped.
    """
    size = cfg.subset_size
    if len(pool) < size:
        raise TrainingException(
            f"No trainable subset: the pool holds {len(pool)} samples, subset_size is {size}"
        )
    order = np.random.default_rng(cfg.seed).permutation(len(pool))
    n_subsets = min(len(pool) // size, cfg.n_learners)
    subsets = [[pool[index] for index in order[i * size:(i + 1) * size]] for i in range(n_subsets)]
    plan = PartitionPlan(subsets=[], built=n_subsets, discarded=len(pool) - n_subsets * size)

    irreparable = set()
    for position, subset in enumerate(subsets):
        missing = _missing_class([sample.y for sample in subset])
        if missing is None:
            continue
        for donor_position, donor in enumerate(subsets):
            if donor_position == position:
                continue
            donor_hits = [k for k, sample in enumerate(donor) if sample.y == missing]
            if len(donor_hits) >= 2:
                given = donor_hits[0]
                subset[0], donor[given] = donor[given], subset[0]
                plan.repaired += 1
                break
        else:
            irreparable.add(position)

    plan.subsets = [subset for position, subset in enumerate(subsets) if position not in irreparable]
    plan.dropped = len(irreparable)
    if plan.repaired or plan.dropped:
        logger.info("Partition: %d subsets repaired, %d dropped as single-class", plan.repaired, plan.dropped)
    return plan


def partition_disjoint_subsets(pool: Sequence[LabeledSample], cfg: EnsembleConfig) -> List[List[LabeledSample]]:
    return plan_partition(pool, cfg).subsets


# Training

def learner_seed(seed: int, index: int) -> int:
    """Seed of learner `index`, derived from (seed, index) alone"""
    return int(np.random.SeedSequence([seed, index]).generate_state(1)[0])


def rbf_spec(training: TrainingConfig) -> KernelSpec:
    return KernelSpec(kind="rbf", rbf_gamma=training.kernel.rbf_gamma)


def _check_backend_config(backend: str, training: TrainingConfig) -> None:
    if backend == "annealed" and training.svm.box_C != training.encoding.alpha_max:
        raise ValidationException(
            f"box_C ({training.svm.box_C}) must equal the encoding's alpha_max "
            f"({training.encoding.alpha_max}) for the annealed backend"
        )


def train_learner(
    subset: Sequence[LabeledSample],
    backend: str,
    training: TrainingConfig,
    seed: int,
) -> WeakLearner:
    if backend == "classical":
        return smo_train(subset, rbf_spec(training), training.svm)
    if backend == "annealed":
        anneal = training.anneal.model_copy(update={"seed": seed})
        return train_weak_learner_annealed(subset, rbf_spec(training), training.encoding, anneal)
    if backend == "gate_kernel":
        return train_gate_svm(subset, training.gate, training.svm)
    raise ValidationException(f"Unknown backend '{backend}'")


def train_ensemble(
    pool: Sequence[LabeledSample],
    cfg: EnsembleConfig,
    training: Optional[TrainingConfig] = None,
    preprocess: Optional[PreprocessConfig] = None,
    sampling: Optional[SamplingConfig] = None,
    threads: int = 1,
) -> Tuple[ModelFile, TrainingReport]:
    """
    Fit the scaler on the raw pool, partition the scaled pool and train one learner per subset.
    Results are collected by subset index, so the thread count never changes the model.
    """
    training = training or TrainingConfig()
    _check_backend_config(cfg.backend, training)
    report = TrainingReport(backend=cfg.backend, pool_size=len(pool), learners_requested=cfg.n_learners)
    started = time.perf_counter()

    phase = time.perf_counter()
    X, _ = samples_to_arrays(pool)
    scaler = fit_scaler(X)
    scaled_pool = [
        LabeledSample(x=scaled, y=sample.y, scene_id=sample.scene_id, row=sample.row, col=sample.col)
        for sample, scaled in zip(pool, apply_scaler(scaler, X))
    ]
    report.phase_seconds["scaling"] = time.perf_counter() - phase

    phase = time.perf_counter()
    plan = plan_partition(scaled_pool, cfg)
    report.phase_seconds["partitioning"] = time.perf_counter() - phase
    report.subsets_built = plan.built
    report.subsets_repaired = plan.repaired
    report.subsets_dropped = plan.dropped

    def fit(index: int) -> Optional[WeakLearner]:
        try:
            return train_learner(plan.subsets[index], cfg.backend, training, learner_seed(cfg.seed, index))
        except TrainingException as exc:
            logger.warning("Learner %d dropped: %s", index, exc.detail)
            return None

    phase = time.perf_counter()
    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool_executor:
        results = list(pool_executor.map(fit, range(len(plan.subsets))))
    report.phase_seconds["training"] = time.perf_counter() - phase

    learners = [learner for learner in results if learner is not None]
    report.learners_trained = len(learners)
    report.learners_dropped = len(results) - len(learners)
    report.smo_unconverged = sum(1 for learner in learners if not learner.converged)
    if not learners:
        raise TrainingException("No trainable subset: every learner failed to train")

    model = ModelFile(
        backend=cfg.backend,
        scaler=scaler,
        learners=learners,
        subset_size=cfg.subset_size,
        aggregation=cfg.aggregation,
        rng_seed=cfg.seed,
        requested_learners=cfg.n_learners,
        preprocess=preprocess or PreprocessConfig(),
        sampling=sampling or SamplingConfig(),
        training=training,
    )
    report.model_id = model.model_id
    report.train_seconds = time.perf_counter() - started
    logger.info(
        "Trained %d/%d %s learners in %.2fs (%d dropped, %d SMO runs unconverged)",
        report.learners_trained, cfg.n_learners, cfg.backend, report.train_seconds,
        report.learners_dropped, report.smo_unconverged,
    )
    return model, report


# Aggregation

def aggregate_decisions(decisions: np.ndarray, rule: str) -> np.ndarray:
    """
    Oil flags for an (L, P) block of decision values. Values are sorted along the learner axis
    first so the result does not depend on learner order.
    """
    decisions = np.asarray(decisions, dtype=np.float64)
    if decisions.ndim == 1:
        decisions = decisions[:, None]
    n_learners = decisions.shape[0]
    if n_learners == 0:
        raise ValidationException("Aggregation needs at least one decision")
    if rule == "mean_decision":
        return np.sort(decisions, axis=0).sum(axis=0) / n_learners > 0
    if rule == "majority_vote":
        votes = np.count_nonzero(decisions > 0, axis=0)
        return votes > n_learners - votes
    raise ValidationException(f"Unknown aggregation rule '{rule}'")


def aggregate(decisions: Sequence[float], rule: str = "mean_decision") -> int:
    """+1 (oil) or -1 (water) for one pixel's learner decisions; ties are water"""
    values = np.asarray(decisions, dtype=np.float64)
    if values.size == 0:
        raise ValidationException("Aggregation needs at least one decision")
    return 1 if bool(aggregate_decisions(values, rule)[0]) else -1


# Inference

KernelFn = Callable[[np.ndarray, np.ndarray], np.ndarray]


def kernel_function(spec: KernelSpec, training: TrainingConfig) -> KernelFn:
    if spec.kind == "gate" and training.gate.evaluation == "statevector":
        gate = GateKernelSpec(angle_scale=spec.angle_scale, evaluation="statevector")
        return lambda A, B: quantum_kernel_matrix(A, B, gate)
    return lambda A, B: kernel_matrix(A, B, spec)


def ensemble_decisions(
    model: ModelFile,
    X: np.ndarray,
    chunk_elements: Optional[int] = None,
) -> np.ndarray:
    """
    (L, P) decision values of every learner on scaled feature rows X. Support vectors of all
    learners sharing a kernel are stacked, and kernel blocks are formed over pixel chunks.
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    decisions = np.empty((model.n_learners, len(X)))
    budget = chunk_elements or settings.INFERENCE_CHUNK_ELEMENTS

    groups: Dict[KernelSpec, List[int]] = {}
    for index, learner in enumerate(model.learners):
        if learner.n_support == 0:
            decisions[index] = learner.bias
        else:
            groups.setdefault(learner.kernel, []).append(index)

    for spec, indices in groups.items():
        kernel = kernel_function(spec, model.training)
        support = np.concatenate([model.learners[i].support_x for i in indices])
        coefficients = np.concatenate([model.learners[i].coefficients for i in indices])
        offsets = np.cumsum([0] + [model.learners[i].n_support for i in indices[:-1]])
        biases = np.array([model.learners[i].bias for i in indices])
        rows = max(1, budget // (len(support) * N_FEATURES))
        for start in range(0, len(X), rows):
            block = kernel(X[start:start + rows], support) * coefficients
            sums = np.add.reduceat(block, offsets, axis=1)
            decisions[indices, start:start + rows] = (sums + biases).T
    return decisions


def check_backend(model: ModelFile, expected_backend: Optional[str] = None) -> None:
    if expected_backend is not None and model.backend != expected_backend:
        raise BackendMismatchException(
            f"Model was trained with backend '{model.backend}', '{expected_backend}' was requested"
        )
    if model.backend not in BACKEND_KERNELS:
        raise BackendMismatchException(f"Unknown model backend '{model.backend}'")
    expected_kernel = BACKEND_KERNELS[model.backend]
    for index, learner in enumerate(model.learners):
        if learner.kernel.kind != expected_kernel:
            raise BackendMismatchException(
                f"Learner {index} uses a '{learner.kernel.kind}' kernel; "
                f"backend '{model.backend}' requires '{expected_kernel}'"
            )


def predict_mask(
    model: ModelFile,
    scene: SarScene,
    expected_backend: Optional[str] = None,
    chunk_elements: Optional[int] = None,
) -> SegmentationMask:
    """Segment a scene preprocessed with the model's stored configuration; land stays water"""
    check_backend(model, expected_backend)
    if not scene.preprocessed:
        raise ValidationException(f"Scene '{scene.scene_id}' must be preprocessed before prediction")
    if model.n_learners == 0:
        raise ValidationException("Model has no learners to predict with")

    feature_image = extract_feature_image(scene)
    pixels = np.zeros(scene.shape, dtype=bool)
    if feature_image.valid.any():
        X = apply_scaler(model.scaler, feature_image.features[feature_image.valid])
        decisions = ensemble_decisions(model, X, chunk_elements)
        pixels[feature_image.valid] = aggregate_decisions(decisions, model.aggregation)
    return SegmentationMask(pixels=pixels, model_id=model.model_id, scene_id=scene.scene_id)
