"""
Side-by-side comparison panels: SAR intensity, ground truth and one predicted mask per backend
"""
import logging
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from PIL import Image, ImageDraw, ImageFont

from slickqsvm.core.exceptions import DimensionMismatchException, ValidationException
from slickqsvm.engine.ensemble import predict_mask
from slickqsvm.engine.preprocess import clip_percentiles, preprocess_scene
from slickqsvm.io.scene_io import load_ground_truth, load_scene
from slickqsvm.models.domain import ModelFile, SarScene
from slickqsvm.models.schemas import ManifestEntry

logger = logging.getLogger(__name__)

PANEL_GAP = 4
CAPTION_HEIGHT = 12
GAP_LEVEL = 64
LAND_LEVEL = 128
# display stretch for the raw VV tile
_DISPLAY_CLIP = (1.0, 99.0)


def sar_tile(scene: SarScene) -> np.ndarray:
    """Raw VV stretched to 8 bits over the water pixels; land is drawn gray"""
    land = scene.land_mask
    valid = None if land is None else ~land
    tile = np.rint(clip_percentiles(scene.vv, *_DISPLAY_CLIP, valid) * 255.0).astype(np.uint8)
    if land is not None:
        tile[land] = LAND_LEVEL
    return tile


def mask_tile(mask: np.ndarray, land: Optional[np.ndarray] = None) -> np.ndarray:
    """Oil white, water black, land gray"""
    tile = np.where(np.asarray(mask, dtype=bool), 255, 0).astype(np.uint8)
    if land is not None:
        tile[land] = LAND_LEVEL
    return tile


def compose_panel(tiles: Sequence[Tuple[str, np.ndarray]]) -> Image.Image:
    """
    Lay equally sized 8-bit tiles out left to right, PANEL_GAP pixels apart, under a caption
    band of CAPTION_HEIGHT pixels holding each tile's label.
    """
    if not tiles:
        raise ValidationException("A comparison panel needs at least one tile")
    shape = tiles[0][1].shape
    for label, tile in tiles:
        if tile.shape != shape:
            raise DimensionMismatchException(f"Tile '{label}' is {tile.shape}, expected {shape}")

    gap = np.full((shape[0], PANEL_GAP), GAP_LEVEL, dtype=np.uint8)
    row = [gap] * (2 * len(tiles) - 1)
    row[::2] = [np.asarray(tile, dtype=np.uint8) for _, tile in tiles]
    body = np.concatenate(row, axis=1)

    caption = Image.new("L", (body.shape[1], CAPTION_HEIGHT), color=0)
    draw = ImageDraw.Draw(caption)
    font = ImageFont.load_default()
    for i, (label, _) in enumerate(tiles):
        draw.text((i * (shape[1] + PANEL_GAP) + 1, 0), label, fill=255, font=font)
    return Image.fromarray(np.concatenate([np.asarray(caption), body], axis=0))


def write_comparison_figures(
    models: Dict[str, ModelFile],
    entries: Sequence[ManifestEntry],
    working_size: Sequence[int],
    out_dir: Union[str, Path],
) -> List[Path]:
    """
    One `<scene_id>_panel.png` per entry: SAR, ground truth (when the entry has a mask), then
    each model's predicted mask in the order of `models`.
    """
    if not models:
        raise ValidationException("Comparison figures need at least one model")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    written = []
    for entry in entries:
        scene = load_scene(entry, working_size)
        tiles = [("SAR", sar_tile(scene))]
        if entry.mask_path:
            tiles.append(("truth", mask_tile(load_ground_truth(entry, scene, working_size).pixels, scene.land_mask)))
        for backend, model in models.items():
            mask = predict_mask(model, preprocess_scene(scene, model.preprocess))
            tiles.append((backend, mask_tile(mask.pixels, scene.land_mask)))

        path = out_dir / f"{entry.scene_id}_panel.png"
        compose_panel(tiles).save(path, format="PNG")
        written.append(path)
    logger.info("Wrote %d comparison panels to %s", len(written), out_dir)
    return written
