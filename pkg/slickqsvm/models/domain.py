"""
Array-carrying domain objects shared by the engine, the codecs and the services
"""
import hashlib
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, List, Optional, Tuple

import numpy as np

from slickqsvm.core.exceptions import DimensionMismatchException, ValidationException
from slickqsvm.models.schemas import (
    KernelSpec,
    PreprocessConfig,
    SamplingConfig,
    TrainingConfig,
)

N_FEATURES = 5
FEATURE_NAMES: Tuple[str, ...] = (
    "vv_intensity",
    "vh_vv_ratio",
    "local_entropy_vv",
    "local_std_vv",
    "gradient_magnitude_vv",
)
FORMAT_VERSION = 1


@dataclass
class SarScene:
    """Co-registered VV/VH intensities of one acquisition, optionally with a land mask"""

    scene_id: str
    vv: np.ndarray
    vh: np.ndarray
    land_mask: Optional[np.ndarray] = None
    preprocessed: bool = False
    gamma_applied: Optional[float] = None

    def __post_init__(self):
        self.vv = np.asarray(self.vv, dtype=np.float64)
        self.vh = np.asarray(self.vh, dtype=np.float64)
        if self.vv.ndim != 2 or self.vv.size == 0:
            raise ValidationException(f"Scene '{self.scene_id}': VV must be a non-empty 2-D raster")
        if self.vv.shape != self.vh.shape:
            raise DimensionMismatchException(
                f"Scene '{self.scene_id}': VV {self.vv.shape} and VH {self.vh.shape} differ"
            )
        if self.land_mask is not None:
            self.land_mask = np.asarray(self.land_mask, dtype=bool)
            if self.land_mask.shape != self.vv.shape:
                raise DimensionMismatchException(
                    f"Scene '{self.scene_id}': land mask {self.land_mask.shape} "
                    f"does not match rasters {self.vv.shape}"
                )
        for band, raster in (("VV", self.vv), ("VH", self.vh)):
            if not np.all(np.isfinite(raster)):
                raise ValidationException(f"Scene '{self.scene_id}': {band} contains non-finite values")
            if np.any(raster < 0):
                raise ValidationException(f"Scene '{self.scene_id}': {band} contains negative values")

    @property
    def height(self) -> int:
        return int(self.vv.shape[0])

    @property
    def width(self) -> int:
        return int(self.vv.shape[1])

    @property
    def shape(self) -> Tuple[int, int]:
        return self.height, self.width

    def valid_pixels(self) -> np.ndarray:
        """Boolean raster of pixels that take part in sampling and inference"""
        if self.land_mask is None:
            return np.ones(self.shape, dtype=bool)
        return ~self.land_mask


@dataclass
class GroundTruthMask:
    pixels: np.ndarray

    def __post_init__(self):
        self.pixels = np.asarray(self.pixels, dtype=bool)
        if self.pixels.ndim != 2:
            raise ValidationException("Ground-truth mask must be a 2-D raster")

    @property
    def height(self) -> int:
        return int(self.pixels.shape[0])

    @property
    def width(self) -> int:
        return int(self.pixels.shape[1])


@dataclass(frozen=True)
class LabeledSample:
    """One feature vector with its oil (+1) / water (-1) label and source pixel"""

    x: np.ndarray
    y: int
    scene_id: str = ""
    row: int = -1
    col: int = -1

    def __post_init__(self):
        if self.y not in (1, -1):
            raise ValidationException(f"Sample label must be +1 or -1, got {self.y}")
        x = np.asarray(self.x, dtype=np.float64)
        if x.shape != (N_FEATURES,) or not np.all(np.isfinite(x)):
            raise DimensionMismatchException(
                f"Sample from '{self.scene_id}' ({self.row}, {self.col}) is not a finite {N_FEATURES}-vector"
            )
        object.__setattr__(self, "x", x)


@dataclass(frozen=True)
class FeatureScaler:
    """Per-feature min-max scaling: x' = (x - shift) / scale"""

    shift: np.ndarray
    scale: np.ndarray

    def __post_init__(self):
        shift = np.asarray(self.shift, dtype=np.float64)
        scale = np.asarray(self.scale, dtype=np.float64)
        if shift.shape != (N_FEATURES,) or scale.shape != (N_FEATURES,):
            raise DimensionMismatchException(f"Feature scaler must hold {N_FEATURES} (shift, scale) pairs")
        if np.any(scale <= 0) or not np.all(np.isfinite(scale)):
            raise ValidationException("Feature scaler scales must be finite and > 0")
        object.__setattr__(self, "shift", shift)
        object.__setattr__(self, "scale", scale)

    def transform(self, x: np.ndarray, clamp: bool = True) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.shape[-1] != N_FEATURES:
            raise DimensionMismatchException(
                f"Scaler expects {N_FEATURES} features, got {x.shape[-1]}"
            )
        out = (x - self.shift) / self.scale
        if clamp:
            np.clip(out, 0.0, 1.0, out=out)
        return out

    def inverse(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(x, dtype=np.float64) * self.scale + self.shift


@dataclass(frozen=True)
class WeakLearner:
    """A decoded SVM: support set, coefficients, bias and the kernel it was trained with"""

    support_x: np.ndarray
    support_y: np.ndarray
    alphas: np.ndarray
    bias: float
    kernel: KernelSpec = field(default_factory=KernelSpec)
    converged: bool = True

    def __post_init__(self):
        support_x = np.asarray(self.support_x, dtype=np.float64)
        if support_x.size == 0:
            support_x = support_x.reshape(0, N_FEATURES)
        if support_x.ndim != 2 or support_x.shape[1] != N_FEATURES:
            raise DimensionMismatchException(
                f"Learner support vectors must have shape (n, {N_FEATURES}), got {support_x.shape}"
            )
        support_y = np.asarray(self.support_y, dtype=np.int8).reshape(-1)
        alphas = np.asarray(self.alphas, dtype=np.float64).reshape(-1)
        if not (len(support_x) == len(support_y) == len(alphas)):
            raise DimensionMismatchException(
                f"Learner support arrays disagree: {len(support_x)} vectors, "
                f"{len(support_y)} labels, {len(alphas)} alphas"
            )
        if np.any(alphas < 0):
            raise ValidationException("Learner alphas must be non-negative")
        if not np.all(np.isin(support_y, (-1, 1))):
            raise ValidationException("Learner labels must be +1 or -1")
        object.__setattr__(self, "support_x", support_x)
        object.__setattr__(self, "support_y", support_y)
        object.__setattr__(self, "alphas", alphas)
        object.__setattr__(self, "bias", float(self.bias))

    @property
    def n_support(self) -> int:
        return int(len(self.alphas))

    @property
    def coefficients(self) -> np.ndarray:
        """alpha_n * y_n, the weights of the kernel expansion"""
        return self.alphas * self.support_y


@dataclass
class QuboProblem:
    """Upper-triangular QUBO; `matrix[i, j]` for i <= j is the coefficient of a_i a_j"""

    matrix: np.ndarray

    def __post_init__(self):
        matrix = np.asarray(self.matrix, dtype=np.float64)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ValidationException("QUBO matrix must be square")
        if np.any(np.tril(matrix, k=-1) != 0):
            raise ValidationException("QUBO matrix must be upper-triangular")
        if not np.all(np.isfinite(matrix)):
            raise ValidationException("QUBO coefficients must be finite")
        self.matrix = matrix

    @classmethod
    def from_coefficients(cls, n_vars: int, coefficients: Dict[Tuple[int, int], float]) -> "QuboProblem":
        matrix = np.zeros((n_vars, n_vars))
        for (i, j), value in coefficients.items():
            if not 0 <= i <= j < n_vars:
                raise ValidationException(f"QUBO key ({i}, {j}) violates i <= j < {n_vars}")
            matrix[i, j] += value
        return cls(matrix)

    @property
    def n_vars(self) -> int:
        return int(self.matrix.shape[0])

    @property
    def coefficients(self) -> Dict[Tuple[int, int], float]:
        rows, cols = np.nonzero(self.matrix)
        return {(int(i), int(j)): float(self.matrix[i, j]) for i, j in zip(rows, cols)}


@dataclass
class StateVector:
    amplitudes: np.ndarray

    def __post_init__(self):
        amplitudes = np.asarray(self.amplitudes, dtype=np.complex128).reshape(-1)
        size = len(amplitudes)
        if size < 2 or size & (size - 1):
            raise ValidationException("State vector length must be a power of two")
        norm = float(np.sum(np.abs(amplitudes) ** 2))
        if abs(norm - 1.0) > 1e-12:
            raise ValidationException(f"State vector norm {norm!r} is not 1")
        self.amplitudes = amplitudes

    @property
    def n_qubits(self) -> int:
        return int(len(self.amplitudes)).bit_length() - 1


@dataclass
class SegmentationMask:
    pixels: np.ndarray
    model_id: str
    scene_id: str


@dataclass
class ModelFile:
    """A trained ensemble plus everything inference needs to replay training-time transforms"""

    backend: str
    scaler: FeatureScaler
    learners: List[WeakLearner]
    subset_size: int
    aggregation: str
    rng_seed: int
    requested_learners: int
    preprocess: PreprocessConfig = field(default_factory=PreprocessConfig)
    sampling: SamplingConfig = field(default_factory=SamplingConfig)
    training: TrainingConfig = field(default_factory=TrainingConfig)
    format_version: int = FORMAT_VERSION

    def __post_init__(self):
        for index, learner in enumerate(self.learners):
            if learner.support_x.shape[1] != N_FEATURES:
                raise DimensionMismatchException(
                    f"Learner {index} has feature dimension {learner.support_x.shape[1]}, expected {N_FEATURES}"
                )

    @property
    def n_learners(self) -> int:
        return len(self.learners)

    @cached_property
    def model_id(self) -> str:
        """Content hash over the learner payload; identical models share an id"""
        digest = hashlib.sha256()
        digest.update(self.backend.encode())
        digest.update(self.scaler.shift.tobytes())
        digest.update(self.scaler.scale.tobytes())
        for learner in self.learners:
            digest.update(learner.alphas.tobytes())
            digest.update(np.float64(learner.bias).tobytes())
            digest.update(learner.support_y.tobytes())
            digest.update(learner.support_x.tobytes())
        return digest.hexdigest()[:16]
