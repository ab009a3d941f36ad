"""
Preprocessing chain: median blur -> percentile clip and rescale -> gamma correction
"""
import logging
from typing import Optional, Sequence

import numpy as np
from scipy import ndimage

from slickqsvm.core.exceptions import ValidationException
from slickqsvm.models.domain import SarScene
from slickqsvm.models.schemas import GAMMA_SWEEP_CANDIDATES, PreprocessConfig

logger = logging.getLogger(__name__)

_CONTRAST_PERCENTILES = (10.0, 90.0)


def nearest_rank_percentile(values: np.ndarray, pct: float) -> float:
    """Smallest value whose empirical CDF reaches pct/100 (nearest-rank)"""
    return float(np.percentile(values, pct, method="inverted_cdf"))


def fill_land(raster: np.ndarray, land: Optional[np.ndarray]) -> np.ndarray:
    """Copy of `raster` with land pixels set to the median of the water pixels (0 when all land)"""
    raster = np.array(raster, dtype=np.float64)
    if land is None or not land.any():
        return raster
    water = raster[~land]
    raster[land] = nearest_rank_percentile(water, 50.0) if water.size else 0.0
    return raster


def median_filter(raster: np.ndarray, window: int) -> np.ndarray:
    raster = np.asarray(raster, dtype=np.float64)
    if window < 1 or window % 2 == 0:
        raise ValidationException(f"Median window must be odd and >= 1, got {window}")
    if window > min(raster.shape):
        raise ValidationException(f"Median window {window} exceeds raster size {raster.shape}")
    if window == 1:
        return raster.copy()
    return ndimage.median_filter(raster, size=window, mode="reflect")


def clip_percentiles(
    raster: np.ndarray,
    low_pct: float,
    high_pct: float,
    valid: Optional[np.ndarray] = None,
) -> np.ndarray:
    """
    Clip to the [low_pct, high_pct] nearest-rank percentiles of the valid pixels, then rescale
    linearly to [0, 1]. A zero-range raster maps to 0.
    """
    raster = np.asarray(raster, dtype=np.float64)
    if raster.size == 0:
        raise ValidationException("Cannot clip an empty raster")
    if not low_pct < high_pct:
        raise ValidationException(f"Clip percentiles must satisfy low < high, got {low_pct} >= {high_pct}")
    values = raster if valid is None else raster[valid]
    if values.size == 0:
        return np.zeros_like(raster)

    low = nearest_rank_percentile(values, low_pct)
    high = nearest_rank_percentile(values, high_pct)
    span = high - low
    if span <= 0:
        return np.zeros_like(raster)
    return (np.clip(raster, low, high) - low) / span


def gamma_correct(raster: np.ndarray, gamma: float) -> np.ndarray:
    raster = np.asarray(raster, dtype=np.float64)
    if not gamma > 0:
        raise ValidationException(f"Gamma must be > 0, got {gamma}")
    if raster.size and (raster.min() < 0.0 or raster.max() > 1.0):
        raise ValidationException("Gamma correction expects values in [0, 1]")
    return np.power(raster, gamma)


def inter_percentile_contrast(raster: np.ndarray, valid: Optional[np.ndarray] = None) -> float:
    values = raster if valid is None else raster[valid]
    if values.size == 0:
        return 0.0
    low, high = _CONTRAST_PERCENTILES
    return nearest_rank_percentile(values, high) - nearest_rank_percentile(values, low)


def select_gamma(
    raster: np.ndarray,
    valid: Optional[np.ndarray] = None,
    candidates: Sequence[float] = GAMMA_SWEEP_CANDIDATES,
) -> float:
    """Candidate gamma maximising p90 - p10 of the valid pixels; ties keep the earlier candidate"""
    if valid is not None and not np.any(valid):
        return 1.0
    best_gamma, best_contrast = candidates[0], -np.inf
    for gamma in candidates:
        contrast = inter_percentile_contrast(gamma_correct(raster, gamma), valid)
        if contrast > best_contrast:
            best_gamma, best_contrast = gamma, contrast
    return float(best_gamma)


def preprocess_scene(scene: SarScene, cfg: PreprocessConfig) -> SarScene:
    """
    Run both bands through the fixed chain; land pixels are zeroed and stay flagged.
    Land is filled with the water median before the median filter, so no land intensity
    reaches a water pixel or a percentile.
    """
    land = scene.land_mask if cfg.apply_land_mask else None
    valid = None if land is None else ~land

    vv, vh = (
        clip_percentiles(
            median_filter(fill_land(band, land), cfg.median_window), cfg.clip_low_pct, cfg.clip_high_pct, valid
        )
        for band in (scene.vv, scene.vh)
    )

    gamma = select_gamma(vv, valid) if cfg.gamma_sweep else cfg.gamma
    vv = gamma_correct(vv, gamma)
    vh = gamma_correct(vh, gamma)

    if land is not None:
        vv[land] = 0.0
        vh[land] = 0.0

    logger.debug("Preprocessed scene %s with gamma %.2f", scene.scene_id, gamma)
    return SarScene(
        scene_id=scene.scene_id,
        vv=vv,
        vh=vh,
        land_mask=None if land is None else land.copy(),
        preprocessed=True,
        gamma_applied=gamma,
    )
