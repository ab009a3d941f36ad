import math
from typing import Dict, List, Literal, Optional, Tuple, Type, TypeVar

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from slickqsvm.core.exceptions import ValidationException

Backend = Literal["classical", "annealed", "gate_kernel"]
Split = Literal["train", "val", "test"]
AggregationRule = Literal["mean_decision", "majority_vote"]
KernelKind = Literal["rbf", "precomputed", "gate"]

BACKENDS: Tuple[str, ...] = ("classical", "annealed", "gate_kernel")
AGGREGATION_RULES: Tuple[str, ...] = ("mean_decision", "majority_vote")
GAMMA_SWEEP_CANDIDATES: Tuple[float, ...] = (0.5, 0.75, 1.0, 1.5, 2.0)

ConfigT = TypeVar("ConfigT", bound=BaseModel)


class ConfigModel(BaseModel):
    """Immutable config block; unknown keys are rejected"""

    model_config = ConfigDict(frozen=True, extra="forbid")


def parse_config(model_class: Type[ConfigT], data: dict) -> ConfigT:
    """Validate `data` into `model_class`, reporting failures as ValidationException"""
    try:
        return model_class.model_validate(data)
    except ValidationError as exc:
        problems = "; ".join(
            f"{'.'.join(str(part) for part in err['loc']) or model_class.__name__}: {err['msg']}"
            for err in exc.errors()
        )
        raise ValidationException(f"Invalid {model_class.__name__}: {problems}") from None


# Preprocessing and sampling

class PreprocessConfig(ConfigModel):
    median_window: int = 3
    clip_low_pct: float = 1.0
    clip_high_pct: float = 99.0
    gamma: float = 1.0
    gamma_sweep: bool = False
    apply_land_mask: bool = True

    @field_validator("median_window")
    @classmethod
    def _odd_window(cls, value: int) -> int:
        if value < 1 or value % 2 == 0:
            raise ValueError("median_window must be odd and >= 1")
        return value

    @field_validator("gamma")
    @classmethod
    def _positive_gamma(cls, value: float) -> float:
        if not value > 0:
            raise ValueError("gamma must be > 0")
        return value

    @model_validator(mode="after")
    def _ordered_percentiles(self) -> "PreprocessConfig":
        if not 0.0 <= self.clip_low_pct < self.clip_high_pct <= 100.0:
            raise ValueError("clip percentiles must satisfy 0 <= low < high <= 100")
        return self


class SamplingConfig(ConfigModel):
    max_oil: int = Field(25, ge=0)
    max_water: int = Field(25, ge=0)
    hard_negative_fraction: float = Field(0.5, ge=0.0, le=1.0)
    dark_percentile: float = Field(10.0, gt=0.0, le=100.0)


# SVM backends

class KernelSpec(ConfigModel):
    kind: KernelKind = "rbf"
    rbf_gamma: float = Field(1.0, gt=0.0)
    # gate kernels map a scaled feature f to the rotation angle angle_scale * f
    angle_scale: float = Field(math.pi, gt=0.0)


class SvmTrainConfig(ConfigModel):
    box_C: float = Field(3.0, gt=0.0)
    smo_tol: float = Field(1e-3, gt=0.0)
    smo_max_passes: int = Field(50, ge=1)


class BinaryEncoding(ConfigModel):
    bits_per_alpha: int = Field(2, ge=1)
    base: int = Field(2, ge=2)
    penalty: float = Field(1.0, ge=0.0)

    @property
    def alpha_max(self) -> float:
        return float(sum(self.base ** k for k in range(self.bits_per_alpha)))


class AnnealConfig(ConfigModel):
    num_reads: int = Field(1000, ge=1)
    top_samples: int = Field(20, ge=1)
    sweeps_per_read: int = Field(1000, ge=1)
    beta_min: float = Field(0.1, gt=0.0)
    beta_max: float = Field(10.0, gt=0.0)
    seed: int = 0
    final_quench: bool = True

    @model_validator(mode="after")
    def _consistent(self) -> "AnnealConfig":
        if self.top_samples > self.num_reads:
            raise ValueError("top_samples must not exceed num_reads")
        if not self.beta_min < self.beta_max:
            raise ValueError("beta_min must be < beta_max")
        return self


class GateKernelSpec(ConfigModel):
    n_qubits: Literal[5] = 5
    angle_scale: float = Field(math.pi, gt=0.0)
    rotation_axis: Literal["Y"] = "Y"
    evaluation: Literal["closed_form", "statevector"] = "closed_form"


class TrainingConfig(ConfigModel):
    """Per-backend settings bundled so they travel together into the model header"""

    svm: SvmTrainConfig = SvmTrainConfig()
    kernel: KernelSpec = KernelSpec()
    encoding: BinaryEncoding = BinaryEncoding()
    anneal: AnnealConfig = AnnealConfig()
    gate: GateKernelSpec = GateKernelSpec()


class EnsembleConfig(ConfigModel):
    n_learners: int = Field(500, ge=1)
    subset_size: int = Field(40, ge=2)
    backend: Backend = "classical"
    aggregation: AggregationRule = "mean_decision"
    seed: int = 0


# Synthetic data

class SynthConfig(ConfigModel):
    n_scenes: int = Field(20, ge=1)
    size: int = Field(256, ge=8)
    slick_count_range: Tuple[int, int] = (1, 3)
    slick_axes_range: Tuple[float, float] = (0.05, 0.2)
    slick_darkness: float = Field(0.3, gt=0.0, lt=1.0)
    speckle_looks: int = Field(4, ge=1)
    background_level: float = Field(0.25, gt=0.0, le=1.0)
    vh_ratio: float = Field(0.2, gt=0.0)
    land_probability: float = Field(0.0, ge=0.0, le=1.0)
    val_scenes: int = Field(0, ge=0)
    test_scenes: int = Field(0, ge=0)
    seed: int = 0

    @model_validator(mode="after")
    def _consistent(self) -> "SynthConfig":
        low, high = self.slick_count_range
        if not 0 <= low <= high:
            raise ValueError("slick_count_range must satisfy 0 <= low <= high")
        a_low, a_high = self.slick_axes_range
        if not 0.0 < a_low <= a_high <= 0.5:
            raise ValueError("slick_axes_range must satisfy 0 < low <= high <= 0.5")
        if self.val_scenes + self.test_scenes > self.n_scenes:
            raise ValueError("val_scenes + test_scenes exceeds n_scenes")
        return self


# Dataset manifest

class ManifestEntry(BaseModel):
    scene_id: str
    vv_path: str
    vh_path: str
    mask_path: Optional[str] = None
    land_mask_path: Optional[str] = None
    split: Split = "train"

    model_config = ConfigDict(extra="forbid")


class DatasetManifest(BaseModel):
    entries: List[ManifestEntry]

    @model_validator(mode="after")
    def _consistent(self) -> "DatasetManifest":
        seen = set()
        for entry in self.entries:
            if entry.scene_id in seen:
                raise ValueError(f"duplicate scene_id '{entry.scene_id}'")
            seen.add(entry.scene_id)
            if entry.split == "train" and not entry.mask_path:
                raise ValueError(f"train entry '{entry.scene_id}' has no mask_path")
        return self

    def split(self, name: str) -> List[ManifestEntry]:
        """Entries belonging to one split, in manifest order"""
        return [entry for entry in self.entries if entry.split == name]


# Reports

class ConfusionCounts(BaseModel):
    tp: int = Field(0, ge=0)
    fp: int = Field(0, ge=0)
    tn: int = Field(0, ge=0)
    fn: int = Field(0, ge=0)

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    def __add__(self, other: "ConfusionCounts") -> "ConfusionCounts":
        return ConfusionCounts(
            tp=self.tp + other.tp,
            fp=self.fp + other.fp,
            tn=self.tn + other.tn,
            fn=self.fn + other.fn,
        )


class SceneMetrics(BaseModel):
    scene_id: str
    iou: float
    f1: float
    balanced_accuracy: float
    counts: ConfusionCounts
    inference_seconds: float = 0.0


class AggregateMetrics(BaseModel):
    iou: float
    f1: float
    balanced_accuracy: float
    counts: ConfusionCounts


class TimingReport(BaseModel):
    train_seconds: Optional[float] = None
    mean_inference_seconds_per_image: float = 0.0


class EvalReport(BaseModel):
    backend: str
    model_id: str
    split: str
    per_scene: List[SceneMetrics]
    aggregate: AggregateMetrics
    timing: TimingReport


class TrainingReport(BaseModel):
    backend: str
    model_id: str = ""
    pool_size: int = 0
    learners_requested: int = 0
    subsets_built: int = 0
    subsets_repaired: int = 0
    subsets_dropped: int = 0
    learners_trained: int = 0
    learners_dropped: int = 0
    smo_unconverged: int = 0
    phase_seconds: Dict[str, float] = {}
    train_seconds: float = 0.0


class BenchRow(BaseModel):
    model: str
    iou: float
    f1: float
    balanced_accuracy: float
    inference_seconds_per_image: float
    training_seconds: Optional[float] = None


# Model file header

class ScalerHeader(BaseModel):
    shift: List[float]
    scale: List[float]


class EnsembleHeader(BaseModel):
    n_learners: int
    subset_size: int
    aggregation_rule: AggregationRule


class ModelHeader(BaseModel):
    backend: Backend
    ensemble_config: EnsembleHeader
    feature_scaler: ScalerHeader
    rng_seed: int
    requested_learners: int
    preprocess: PreprocessConfig
    sampling: SamplingConfig
    training: TrainingConfig

    model_config = ConfigDict(extra="forbid")
