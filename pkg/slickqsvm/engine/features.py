"""
Per-pixel features, min-max scaling and balanced pixel sampling
"""
import csv
import logging
import zlib
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy import ndimage
from skimage.filters.rank import entropy as rank_entropy

from slickqsvm.core.exceptions import DimensionMismatchException, ValidationException
from slickqsvm.engine.preprocess import fill_land, nearest_rank_percentile
from slickqsvm.models.domain import (
    N_FEATURES,
    FeatureScaler,
    GroundTruthMask,
    LabeledSample,
    SarScene,
)
from slickqsvm.models.schemas import SamplingConfig

logger = logging.getLogger(__name__)

RATIO_EPSILON = 1e-6
RATIO_CAP = 1e6
ENTROPY_LEVELS = 32


@dataclass
class FeatureImage:
    """(H, W, 5) feature planes plus the pixels that may be sampled or classified"""

    features: np.ndarray
    valid: np.ndarray

    @property
    def shape(self) -> Tuple[int, int]:
        return self.valid.shape


def vh_vv_ratio(vh, vv):
    """vh / max(vv, 1e-6), capped at 1e6; works on scalars and arrays"""
    ratio = np.minimum(np.asarray(vh, dtype=np.float64) / np.maximum(np.asarray(vv, dtype=np.float64), RATIO_EPSILON), RATIO_CAP)
    return float(ratio) if ratio.ndim == 0 else ratio


def _window_pad(raster: np.ndarray, window: int) -> np.ndarray:
    # numpy "symmetric" repeats the edge sample, the same rule as ndimage "reflect"
    return np.pad(raster, window // 2, mode="symmetric")


def quantize(raster: np.ndarray, levels: int = ENTROPY_LEVELS) -> np.ndarray:
    return np.minimum(np.floor(np.asarray(raster) * levels), levels - 1).astype(np.uint8)


def local_entropy(raster: np.ndarray, window: int = 3) -> np.ndarray:
    """Shannon entropy in bits of the 32-level histogram of each window"""
    pad = window // 2
    padded = _window_pad(quantize(raster), window)
    entropy = rank_entropy(padded, np.ones((window, window), dtype=np.uint8))
    return entropy[pad:pad + raster.shape[0], pad:pad + raster.shape[1]].astype(np.float64)


def local_std(raster: np.ndarray, window: int = 3) -> np.ndarray:
    """Population standard deviation of each window"""
    windows = sliding_window_view(_window_pad(np.asarray(raster, dtype=np.float64), window), (window, window))
    return windows.std(axis=(-2, -1))


def sobel_gradient_magnitude(raster: np.ndarray) -> np.ndarray:
    raster = np.asarray(raster, dtype=np.float64)
    gx = ndimage.sobel(raster, axis=1, mode="reflect")
    gy = ndimage.sobel(raster, axis=0, mode="reflect")
    return np.hypot(gx, gy)


def extract_feature_image(scene: SarScene) -> FeatureImage:
    """
    Stack [VV, VH/VV, entropy(VV), std(VV), |Sobel(VV)|] for every pixel. The window features
    see land as the water median of VV, not as the zeros preprocessing leaves there.
    """
    for band, raster in (("VV", scene.vv), ("VH", scene.vh)):
        if raster.min() < 0.0 or raster.max() > 1.0:
            raise ValidationException(
                f"Scene '{scene.scene_id}': {band} lies outside [0, 1]; preprocess the scene first"
            )
    windowed = fill_land(scene.vv, scene.land_mask)
    features = np.stack(
        [
            scene.vv,
            vh_vv_ratio(scene.vh, scene.vv),
            local_entropy(windowed),
            local_std(windowed),
            sobel_gradient_magnitude(windowed),
        ],
        axis=-1,
    )
    return FeatureImage(features=features, valid=scene.valid_pixels())


# Scaling

def fit_scaler(samples: Union[Sequence[LabeledSample], np.ndarray]) -> FeatureScaler:
    """Min-max scaler fitted on training vectors; constant columns get scale 1"""
    X = samples if isinstance(samples, np.ndarray) else samples_to_arrays(samples)[0]
    if len(X) == 0:
        raise ValidationException("Cannot fit a feature scaler on an empty sample set")
    shift = X.min(axis=0)
    scale = X.max(axis=0) - shift
    scale[scale <= 0] = 1.0
    return FeatureScaler(shift=shift, scale=scale)


def apply_scaler(scaler: FeatureScaler, x: np.ndarray) -> np.ndarray:
    """Scale and clamp to [0, 1]"""
    return scaler.transform(x, clamp=True)


# Sampling

def scene_rng(seed: int, scene_id: str) -> np.random.Generator:
    """Generator keyed on (seed, scene id) so scenes can be sampled in any order"""
    return np.random.default_rng([seed, zlib.crc32(scene_id.encode("utf-8"))])


def sample_training_pixels(
    scene: SarScene,
    mask: GroundTruthMask,
    rng_seed: int,
    cfg: Optional[SamplingConfig] = None,
    feature_image: Optional[FeatureImage] = None,
) -> List[LabeledSample]:
    """
    Draw up to `max_oil` oil and `max_water` water pixels from a preprocessed scene.

    Samples come back as oil, then hard negatives (VV at or below the water
    `dark_percentile`), then uniformly drawn water.
    """
    cfg = cfg or SamplingConfig()
    if (mask.height, mask.width) != scene.shape:
        raise DimensionMismatchException(
            f"Scene '{scene.scene_id}': mask {mask.pixels.shape} does not match scene {scene.shape}"
        )
    feature_image = feature_image or extract_feature_image(scene)
    rng = scene_rng(rng_seed, scene.scene_id)

    valid = feature_image.valid.ravel()
    truth = mask.pixels.ravel()
    oil_pixels = np.flatnonzero(truth & valid)
    water_pixels = np.flatnonzero(~truth & valid)

    oil = rng.choice(oil_pixels, size=min(cfg.max_oil, len(oil_pixels)), replace=False)

    n_water = min(cfg.max_water, len(water_pixels))
    hard = np.empty(0, dtype=np.int64)
    if n_water:
        vv = scene.vv.ravel()
        threshold = nearest_rank_percentile(vv[water_pixels], cfg.dark_percentile)
        dark_pixels = water_pixels[vv[water_pixels] <= threshold]
        n_hard = min(int(np.floor(n_water * cfg.hard_negative_fraction)), len(dark_pixels))
        hard = rng.choice(dark_pixels, size=n_hard, replace=False)
    remaining = np.setdiff1d(water_pixels, hard, assume_unique=True)
    uniform = rng.choice(remaining, size=n_water - len(hard), replace=False)

    flat_features = feature_image.features.reshape(-1, N_FEATURES)
    width = scene.width
    samples = [
        LabeledSample(x=flat_features[index], y=label, scene_id=scene.scene_id, row=int(index // width), col=int(index % width))
        for indices, label in ((oil, 1), (hard, -1), (uniform, -1))
        for index in indices
    ]
    logger.debug(
        "Scene %s: sampled %d oil, %d hard-negative and %d uniform water pixels",
        scene.scene_id, len(oil), len(hard), len(uniform),
    )
    return samples


def samples_to_arrays(samples: Sequence[LabeledSample]) -> Tuple[np.ndarray, np.ndarray]:
    if not samples:
        return np.empty((0, N_FEATURES)), np.empty(0, dtype=np.int8)
    X = np.stack([sample.x for sample in samples])
    y = np.array([sample.y for sample in samples], dtype=np.int8)
    return X, y


def export_samples_csv(samples: Sequence[LabeledSample], path: Union[str, Path]) -> None:
    """Audit CSV: scene_id,row,col,f1..f5,y"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["scene_id", "row", "col"] + [f"f{i + 1}" for i in range(N_FEATURES)] + ["y"])
        for sample in samples:
            writer.writerow([sample.scene_id, sample.row, sample.col] + [repr(float(v)) for v in sample.x] + [sample.y])
