"""
Raster, mask and manifest loading; PNG writers for rasters and masks
"""
import json
import logging
from pathlib import Path
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from PIL import Image, UnidentifiedImageError

from slickqsvm.core.exceptions import (
    DimensionMismatchException,
    NotFoundException,
    UnsupportedFormatException,
    ValidationException,
)
from slickqsvm.models.domain import GroundTruthMask, SarScene
from slickqsvm.models.schemas import DatasetManifest, ManifestEntry, parse_config

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

SUPPORTED_FORMATS = ("PNG", "TIFF")
_SIXTEEN_BIT_MODES = ("I;16", "I;16B", "I;16L", "I;16N")
# TIFF compression tags Pillow reports for uncompressed strips
_UNCOMPRESSED = (None, "raw")
_MASK_OIL_FRACTION = 0.5


def _open(path: PathLike) -> Image.Image:
    path = Path(path)
    if not path.is_file():
        raise NotFoundException(f"Raster '{path}' does not exist")
    try:
        image = Image.open(path)
    except UnidentifiedImageError:
        raise UnsupportedFormatException(f"Raster '{path}' is not a readable image") from None
    if image.format not in SUPPORTED_FORMATS:
        raise UnsupportedFormatException(
            f"Raster '{path}' is {image.format}; supported formats are {', '.join(SUPPORTED_FORMATS)}"
        )
    if image.format == "TIFF" and image.info.get("compression") not in _UNCOMPRESSED:
        raise UnsupportedFormatException(
            f"Raster '{path}' uses TIFF compression '{image.info.get('compression')}'"
        )
    if len(image.getbands()) != 1:
        raise UnsupportedFormatException(
            f"Raster '{path}' has {len(image.getbands())} bands; single-band rasters only"
        )
    return image


def raster_shape(path: PathLike) -> Tuple[int, int]:
    """(height, width) of a raster without decoding its pixels"""
    with _open(path) as image:
        width, height = image.size
    return height, width


def read_raster(path: PathLike) -> np.ndarray:
    """
    Decode a single-band raster into float64 intensities.

    Integer rasters are divided by the largest value of their bit depth; 32-bit float TIFFs are
    taken as linear intensity as stored.
    """
    with _open(path) as image:
        mode = image.mode
        data = np.asarray(image)

    if mode == "1":
        raise UnsupportedFormatException(f"Raster '{path}' is 1-bit; 8/16-bit or float only")
    if mode == "L":
        raster = data.astype(np.float64) / 255.0
    elif mode in _SIXTEEN_BIT_MODES:
        raster = data.astype(np.float64) / 65535.0
    elif mode == "I":
        # Pillow widens 16-bit PNGs to 32-bit "I" on some versions
        if data.size and (data.min() < 0 or data.max() > 65535):
            raise UnsupportedFormatException(f"Raster '{path}' holds 32-bit integers; 8/16-bit only")
        raster = data.astype(np.float64) / 65535.0
    elif mode == "F":
        raster = data.astype(np.float64)
    else:
        raise UnsupportedFormatException(f"Raster '{path}' has unsupported mode '{mode}'")

    if not np.all(np.isfinite(raster)):
        raise ValidationException(f"Raster '{path}' contains NaN or infinite values")
    if np.any(raster < 0):
        raise ValidationException(f"Raster '{path}' contains negative intensities")
    return raster


def _area_weights(n_in: int, n_out: int) -> np.ndarray:
    """(n_out, n_in) matrix of source-pixel coverage fractions for each output cell"""
    edges = np.arange(n_out + 1, dtype=np.float64) * n_in / n_out
    low, high = edges[:-1, None], edges[1:, None]
    source = np.arange(n_in, dtype=np.float64)[None, :]
    overlap = np.clip(np.minimum(high, source + 1.0) - np.maximum(low, source), 0.0, None)
    return overlap / (high - low)


def area_resample(raster: np.ndarray, out_shape: Sequence[int]) -> np.ndarray:
    """Resample by area-averaging; each output cell is the coverage-weighted mean of its sources"""
    raster = np.asarray(raster, dtype=np.float64)
    out_h, out_w = int(out_shape[0]), int(out_shape[1])
    if raster.shape == (out_h, out_w):
        return raster.copy()
    rows = _area_weights(raster.shape[0], out_h)
    cols = _area_weights(raster.shape[1], out_w)
    return rows @ raster @ cols.T


def nearest_resample(raster: np.ndarray, out_shape: Sequence[int]) -> np.ndarray:
    raster = np.asarray(raster)
    out_h, out_w = int(out_shape[0]), int(out_shape[1])
    if raster.shape == (out_h, out_w):
        return raster.copy()
    rows = np.minimum(((np.arange(out_h) + 0.5) * raster.shape[0] / out_h).astype(np.int64), raster.shape[0] - 1)
    cols = np.minimum(((np.arange(out_w) + 0.5) * raster.shape[1] / out_w).astype(np.int64), raster.shape[1] - 1)
    return raster[np.ix_(rows, cols)]


def load_scene(entry: ManifestEntry, working_size: Sequence[int]) -> SarScene:
    """Load VV/VH (and the land mask, if any) and resample them to `working_size`"""
    vv = read_raster(entry.vv_path)
    vh = read_raster(entry.vh_path)
    if vv.shape != vh.shape:
        raise DimensionMismatchException(
            f"Scene '{entry.scene_id}': VV {vv.shape} and VH {vh.shape} have different dimensions"
        )
    land_mask = None
    if entry.land_mask_path:
        land_mask = load_land_mask(entry.land_mask_path, working_size, expected_shape=vv.shape)

    logger.debug("Loaded scene %s at %s, resampling to %s", entry.scene_id, vv.shape, tuple(working_size))
    return SarScene(
        scene_id=entry.scene_id,
        vv=area_resample(vv, working_size),
        vh=area_resample(vh, working_size),
        land_mask=land_mask,
    )


def load_land_mask(
    path: PathLike,
    working_size: Sequence[int],
    expected_shape: Optional[Tuple[int, int]] = None,
) -> np.ndarray:
    """Boolean land raster (true = land) resampled with nearest-neighbour"""
    raw = read_raster(path) > 0
    if expected_shape is not None and raw.shape != tuple(expected_shape):
        raise DimensionMismatchException(
            f"Land mask '{path}' is {raw.shape}, scene rasters are {tuple(expected_shape)}"
        )
    return nearest_resample(raw, working_size)


def load_mask(
    path: PathLike,
    working_size: Sequence[int],
    expected_shape: Optional[Tuple[int, int]] = None,
) -> GroundTruthMask:
    """Ground truth at `working_size`; a cell is oil iff at least half its source area is oil"""
    oil = (read_raster(path) > 0).astype(np.float64)
    if expected_shape is not None and oil.shape != tuple(expected_shape):
        raise DimensionMismatchException(
            f"Mask '{path}' is {oil.shape}, scene rasters are {tuple(expected_shape)}"
        )
    fraction = area_resample(oil, working_size)
    return GroundTruthMask(pixels=fraction >= _MASK_OIL_FRACTION - 1e-12)


def load_ground_truth(entry: ManifestEntry, scene: SarScene, working_size: Sequence[int]) -> GroundTruthMask:
    """The entry's mask aligned with `scene`, with land pixels forced to non-oil"""
    if not entry.mask_path:
        raise NotFoundException(f"Scene '{entry.scene_id}' has no ground-truth mask")
    mask = load_mask(entry.mask_path, working_size, expected_shape=raster_shape(entry.vv_path))
    if (mask.height, mask.width) != scene.shape:
        raise DimensionMismatchException(
            f"Scene '{entry.scene_id}': mask {mask.pixels.shape} does not match scene {scene.shape}"
        )
    if scene.land_mask is not None:
        mask.pixels[scene.land_mask] = False
    return mask


# Manifests

_PATH_FIELDS = ("vv_path", "vh_path", "mask_path", "land_mask_path")


def load_manifest(path: PathLike) -> DatasetManifest:
    """Parse a manifest JSON array; relative paths resolve against the manifest's directory"""
    path = Path(path)
    if not path.is_file():
        raise NotFoundException(f"Manifest '{path}' does not exist")
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValidationException(f"Manifest '{path}' is not valid JSON: {exc}") from None
    if not isinstance(raw, list):
        raise ValidationException(f"Manifest '{path}' must be a JSON array of entries")

    base_dir = path.parent
    resolved = []
    for item in raw:
        if isinstance(item, dict):
            item = dict(item)
            for name in _PATH_FIELDS:
                value = item.get(name)
                if value and not Path(value).is_absolute():
                    item[name] = str(base_dir / value)
        resolved.append(item)

    manifest = parse_config(DatasetManifest, {"entries": resolved})
    for entry in manifest.entries:
        for name in _PATH_FIELDS:
            value = getattr(entry, name)
            if value and not Path(value).is_file():
                raise NotFoundException(f"Scene '{entry.scene_id}': {name} '{value}' does not exist")
    logger.info("Loaded manifest %s with %d entries", path, len(manifest.entries))
    return manifest


def save_manifest(manifest: DatasetManifest, path: PathLike) -> None:
    """Write the manifest as a JSON array, storing paths relative to its directory when possible"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    base_dir = path.parent.resolve()
    entries = []
    for entry in manifest.entries:
        item = entry.model_dump(exclude_none=True)
        for name in _PATH_FIELDS:
            if name in item:
                target = Path(item[name]).resolve()
                if target.is_relative_to(base_dir):
                    item[name] = target.relative_to(base_dir).as_posix()
        entries.append(item)
    path.write_text(json.dumps(entries, indent=2) + "\n", encoding="utf-8")


# Writers

def write_mask_png(mask: np.ndarray, path: PathLike) -> None:
    """8-bit PNG, 0 = water, 255 = oil"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pixels = np.where(np.asarray(mask, dtype=bool), 255, 0).astype(np.uint8)
    Image.fromarray(pixels).save(path, format="PNG")


def write_raster_png(raster: np.ndarray, path: PathLike, bit_depth: int = 16) -> None:
    """Intensities in [0, 1] (values above 1 are clipped) as an 8- or 16-bit grayscale PNG"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    clipped = np.clip(np.asarray(raster, dtype=np.float64), 0.0, 1.0)
    if bit_depth == 16:
        pixels = np.rint(clipped * 65535.0).astype(np.uint16)
    elif bit_depth == 8:
        pixels = np.rint(clipped * 255.0).astype(np.uint8)
    else:
        raise ValidationException(f"bit_depth must be 8 or 16, got {bit_depth}")
    Image.fromarray(pixels).save(path, format="PNG")
