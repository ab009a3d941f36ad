"""
Model evaluation over a manifest split, report export and the benchmark table
"""
import csv
import logging
import time
from pathlib import Path
from typing import Optional, Sequence, Union

from slickqsvm.core.exceptions import ValidationException
from slickqsvm.engine.ensemble import predict_mask
from slickqsvm.engine.metrics import aggregate_metrics, balanced_accuracy, confusion, f1, iou
from slickqsvm.engine.preprocess import preprocess_scene
from slickqsvm.io.scene_io import load_ground_truth, load_scene
from slickqsvm.models.domain import ModelFile
from slickqsvm.models.schemas import (
    BenchRow,
    EvalReport,
    ManifestEntry,
    PreprocessConfig,
    SceneMetrics,
    TimingReport,
)

logger = logging.getLogger(__name__)

BENCH_COLUMNS = (
    "Model",
    "IoU",
    "F1",
    "Balanced accuracy",
    "Inference time per image (s)",
    "Training time (s)",
)


def evaluate_model(
    model: ModelFile,
    entries: Sequence[ManifestEntry],
    working_size: Sequence[int],
    preprocess: Optional[PreprocessConfig] = None,
    split: str = "test",
    train_seconds: Optional[float] = None,
    repeat: int = 1,
) -> EvalReport:
    """
    Score `model` on every entry. Inference time covers preprocessing and prediction and is
    averaged over `repeat` passes per scene.
    """
    if not entries:
        raise ValidationException(f"Split '{split}' has no entries to evaluate")
    if repeat < 1:
        raise ValidationException(f"repeat must be >= 1, got {repeat}")
    preprocess = preprocess or model.preprocess

    per_scene = []
    for entry in entries:
        if not entry.mask_path:
            raise ValidationException(f"Scene '{entry.scene_id}' has no ground truth to evaluate against")
        scene = load_scene(entry, working_size)
        truth = load_ground_truth(entry, scene, working_size)

        elapsed = 0.0
        for _ in range(repeat):
            started = time.perf_counter()
            mask = predict_mask(model, preprocess_scene(scene, preprocess))
            elapsed += time.perf_counter() - started

        counts = confusion(mask.pixels, truth.pixels, scene.land_mask)
        per_scene.append(
            SceneMetrics(
                scene_id=entry.scene_id,
                iou=iou(counts),
                f1=f1(counts),
                balanced_accuracy=balanced_accuracy(counts),
                counts=counts,
                inference_seconds=elapsed / repeat,
            )
        )
        logger.info("Scene %s: IoU %.3f, %.3fs per image", entry.scene_id, per_scene[-1].iou, elapsed / repeat)

    timing = TimingReport(
        train_seconds=train_seconds,
        mean_inference_seconds_per_image=sum(m.inference_seconds for m in per_scene) / len(per_scene),
    )
    return EvalReport(
        backend=model.backend,
        model_id=model.model_id,
        split=split,
        per_scene=per_scene,
        aggregate=aggregate_metrics(m.counts for m in per_scene),
        timing=timing,
    )


def write_report_json(report: EvalReport, path: Union[str, Path]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(report.model_dump_json(indent=2) + "\n", encoding="utf-8")


def write_report_csv(report: EvalReport, path: Union[str, Path]) -> None:
    """One row per scene: id, metrics, confusion counts and inference seconds"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["scene_id", "iou", "f1", "balanced_accuracy", "tp", "fp", "tn", "fn", "inference_seconds"])
        for row in report.per_scene:
            c = row.counts
            writer.writerow(
                [row.scene_id, row.iou, row.f1, row.balanced_accuracy, c.tp, c.fp, c.tn, c.fn, row.inference_seconds]
            )


def bench_row(report: EvalReport) -> BenchRow:
    return BenchRow(
        model=report.backend,
        iou=report.aggregate.iou,
        f1=report.aggregate.f1,
        balanced_accuracy=report.aggregate.balanced_accuracy,
        inference_seconds_per_image=report.timing.mean_inference_seconds_per_image,
        training_seconds=report.timing.train_seconds,
    )


def render_benchmark_table(rows: Sequence[BenchRow]) -> str:
    lines = [
        "| " + " | ".join(BENCH_COLUMNS) + " |",
        "|" + "|".join(["---"] + ["---:"] * (len(BENCH_COLUMNS) - 1)) + "|",
    ]
    for row in rows:
        training = "-" if row.training_seconds is None else f"{row.training_seconds:.2f}"
        lines.append(
            f"| {row.model} | {row.iou:.3f} | {row.f1:.3f} | {row.balanced_accuracy:.3f} "
            f"| {row.inference_seconds_per_image:.3f} | {training} |"
        )
    return "\n".join(lines) + "\n"
