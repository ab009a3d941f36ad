"""
Synthetic dual-polarisation scenes: gamma speckle over a flat sea with dark elliptical slicks
"""
import logging
from pathlib import Path
from typing import Tuple, Union

import numpy as np

from slickqsvm.io.scene_io import save_manifest, write_mask_png, write_raster_png
from slickqsvm.models.schemas import DatasetManifest, ManifestEntry, SynthConfig

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"
LAND_BRIGHTNESS = 2.0
LAND_WIDTH_RANGE = (0.1, 0.25)


def speckle(rng: np.random.Generator, looks: int, shape: Tuple[int, int]) -> np.ndarray:
    """Unit-mean multi-look intensity speckle, Gamma(looks, 1/looks)"""
    return rng.gamma(shape=looks, scale=1.0 / looks, size=shape)


def ellipse_mask(shape: Tuple[int, int], center: Tuple[float, float], axes: Tuple[float, float], angle: float) -> np.ndarray:
    rows, cols = np.mgrid[0:shape[0], 0:shape[1]].astype(np.float64)
    dy, dx = rows - center[0], cols - center[1]
    u = dx * np.cos(angle) + dy * np.sin(angle)
    v = -dx * np.sin(angle) + dy * np.cos(angle)
    return (u / axes[0]) ** 2 + (v / axes[1]) ** 2 <= 1.0


def land_strip(rng: np.random.Generator, size: int) -> np.ndarray:
    """Boolean strip along one randomly chosen image edge"""
    width = max(1, int(round(rng.uniform(*LAND_WIDTH_RANGE) * size)))
    land = np.zeros((size, size), dtype=bool)
    edge = int(rng.integers(4))
    if edge == 0:
        land[:width, :] = True
    elif edge == 1:
        land[-width:, :] = True
    elif edge == 2:
        land[:, :width] = True
    else:
        land[:, -width:] = True
    return land


def synthesize_scene(cfg: SynthConfig, index: int):
    """(vv, vh, oil mask, land mask or None) for scene `index`"""
    rng = np.random.default_rng([cfg.seed, index])
    shape = (cfg.size, cfg.size)
    vv = cfg.background_level * speckle(rng, cfg.speckle_looks, shape)

    oil = np.zeros(shape, dtype=bool)
    low, high = cfg.slick_count_range
    for _ in range(int(rng.integers(low, high + 1))):
        center = (rng.uniform(0, cfg.size), rng.uniform(0, cfg.size))
        axes = (rng.uniform(*cfg.slick_axes_range) * cfg.size, rng.uniform(*cfg.slick_axes_range) * cfg.size)
        oil |= ellipse_mask(shape, center, axes, rng.uniform(0.0, np.pi))
    vv[oil] *= cfg.slick_darkness

    land = None
    if rng.random() < cfg.land_probability:
        land = land_strip(rng, cfg.size)
        vv[land] = cfg.background_level * LAND_BRIGHTNESS * speckle(rng, cfg.speckle_looks, shape)[land]
        oil &= ~land

    vh = cfg.vh_ratio * vv * speckle(rng, cfg.speckle_looks, shape)
    return vv, vh, oil, land


def split_for(cfg: SynthConfig, index: int) -> str:
    """The last `test_scenes` scenes are test, the `val_scenes` before them are val"""
    if index >= cfg.n_scenes - cfg.test_scenes:
        return "test"
    if index >= cfg.n_scenes - cfg.test_scenes - cfg.val_scenes:
        return "val"
    return "train"


def generate_synthetic_dataset(cfg: SynthConfig, out_dir: Union[str, Path]) -> DatasetManifest:
    """Write scenes, masks and `manifest.json` under `out_dir`"""
    out_dir = Path(out_dir)
    scene_dir = out_dir / "scenes"
    scene_dir.mkdir(parents=True, exist_ok=True)

    entries = []
    for index in range(cfg.n_scenes):
        scene_id = f"scene_{index:04d}"
        vv, vh, oil, land = synthesize_scene(cfg, index)
        paths = {
            "vv_path": scene_dir / f"{scene_id}_vv.png",
            "vh_path": scene_dir / f"{scene_id}_vh.png",
            "mask_path": scene_dir / f"{scene_id}_mask.png",
        }
        write_raster_png(vv, paths["vv_path"])
        write_raster_png(vh, paths["vh_path"])
        write_mask_png(oil, paths["mask_path"])
        if land is not None:
            paths["land_mask_path"] = scene_dir / f"{scene_id}_land.png"
            write_mask_png(land, paths["land_mask_path"])
        entries.append(
            ManifestEntry(
                scene_id=scene_id,
                split=split_for(cfg, index),
                **{name: str(path) for name, path in paths.items()},
            )
        )

    manifest = DatasetManifest(entries=entries)
    save_manifest(manifest, out_dir / MANIFEST_NAME)
    logger.info(
        "Generated %d synthetic scenes (%d train, %d val, %d test) in %s",
        cfg.n_scenes, len(manifest.split("train")), len(manifest.split("val")), len(manifest.split("test")), out_dir,
    )
    return manifest
