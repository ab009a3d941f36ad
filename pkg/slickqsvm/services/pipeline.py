"""
Pipeline services composing the engine for the CLI: sampling, training, prediction,
evaluation and benchmarking
"""
import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from slickqsvm.core.config import settings
from slickqsvm.core.exceptions import NotFoundException, ValidationException
from slickqsvm.engine.ensemble import check_backend, predict_mask, train_ensemble
from slickqsvm.engine.evaluation import (
    bench_row,
    evaluate_model,
    render_benchmark_table,
    write_report_csv,
    write_report_json,
)
from slickqsvm.engine.features import export_samples_csv, sample_training_pixels
from slickqsvm.engine.figures import write_comparison_figures
from slickqsvm.engine.preprocess import preprocess_scene
from slickqsvm.io.model_file import load_model, save_model
from slickqsvm.io.scene_io import (
    load_ground_truth,
    load_manifest,
    load_scene,
    write_mask_png,
    write_raster_png,
)
from slickqsvm.models.domain import LabeledSample, ModelFile
from slickqsvm.models.schemas import (
    BenchRow,
    EnsembleConfig,
    EvalReport,
    ManifestEntry,
    PreprocessConfig,
    SamplingConfig,
    TrainingConfig,
    TrainingReport,
)
from slickqsvm.services.registry import Registry

logger = logging.getLogger(__name__)

PREPROCESS_SUMMARY = "preprocess.json"


def training_report_path(model_path) -> Path:
    """`<model>.report.json`, written beside the model file"""
    model_path = Path(model_path)
    return model_path.with_name(model_path.name + ".report.json")


def load_training_report(model_path) -> Optional[TrainingReport]:
    path = training_report_path(model_path)
    if not path.is_file():
        return None
    return TrainingReport.model_validate_json(path.read_text(encoding="utf-8"))


def select_entries(entries: Sequence[ManifestEntry], split: Optional[str]) -> List[ManifestEntry]:
    return [entry for entry in entries if split is None or entry.split == split]


class SamplingService:
    """Per-scene load -> preprocess -> balanced pixel sampling"""

    def __init__(self, working_size: Sequence[int] = None, threads: int = 1):
        self.working_size = tuple(working_size or settings.WORKING_SIZE)
        self.threads = threads

    def sample_entry(self, entry: ManifestEntry, preprocess: PreprocessConfig, sampling: SamplingConfig,
                     seed: int) -> List[LabeledSample]:
        scene = load_scene(entry, self.working_size)
        truth = load_ground_truth(entry, scene, self.working_size)
        return sample_training_pixels(preprocess_scene(scene, preprocess), truth, seed, sampling)

    def collect_pool(self, entries: Sequence[ManifestEntry], preprocess: PreprocessConfig,
                     sampling: SamplingConfig, seed: int) -> List[LabeledSample]:
        """Samples of all entries, concatenated in manifest order"""
        with ThreadPoolExecutor(max_workers=max(1, self.threads)) as executor:
            per_scene = list(executor.map(lambda e: self.sample_entry(e, preprocess, sampling, seed), entries))
        pool = [sample for samples in per_scene for sample in samples]
        n_oil = sum(1 for sample in pool if sample.y == 1)
        logger.info("Sampled %d pixels (%d oil, %d water) from %d scenes",
                    len(pool), n_oil, len(pool) - n_oil, len(entries))
        return pool


class PreprocessService:
    """Writes preprocessed bands for inspection and, optionally, the sampled training pixels"""

    def __init__(self, working_size: Sequence[int] = None, threads: int = 1):
        self.sampler = SamplingService(working_size, threads)

    def run(self, manifest_path, out_dir, preprocess: PreprocessConfig, split: Optional[str] = None,
            samples_csv=None, sampling: Optional[SamplingConfig] = None, seed: int = 0) -> Dict[str, float]:
        """Returns the gamma applied to each scene"""
        manifest = load_manifest(manifest_path)
        entries = select_entries(manifest.entries, split)
        if not entries:
            raise ValidationException(f"Manifest '{manifest_path}' has no entries in split '{split}'")
        out_dir = Path(out_dir)

        gammas = {}
        for entry in entries:
            scene = preprocess_scene(load_scene(entry, self.sampler.working_size), preprocess)
            write_raster_png(scene.vv, out_dir / f"{entry.scene_id}_vv.png")
            write_raster_png(scene.vh, out_dir / f"{entry.scene_id}_vh.png")
            gammas[entry.scene_id] = scene.gamma_applied
        (out_dir / PREPROCESS_SUMMARY).write_text(
            json.dumps({"preprocess": preprocess.model_dump(), "gamma_applied": gammas}, indent=2) + "\n",
            encoding="utf-8",
        )

        if samples_csv is not None:
            labeled = [entry for entry in entries if entry.mask_path]
            pool = self.sampler.collect_pool(labeled, preprocess, sampling or SamplingConfig(), seed)
            export_samples_csv(pool, samples_csv)
        logger.info("Preprocessed %d scenes into %s", len(entries), out_dir)
        return gammas


class TrainingService:
    """Train split -> sample pool -> ensemble -> model file and training report"""

    def __init__(self, working_size: Sequence[int] = None, threads: int = 1, registry: Registry = None):
        self.sampler = SamplingService(working_size, threads)
        self.threads = threads
        self.registry = registry

    def train(self, manifest_path, model_out, ensemble: EnsembleConfig,
              training: Optional[TrainingConfig] = None, preprocess: Optional[PreprocessConfig] = None,
              sampling: Optional[SamplingConfig] = None) -> Tuple[ModelFile, TrainingReport]:
        preprocess = preprocess or PreprocessConfig()
        sampling = sampling or SamplingConfig()
        manifest = load_manifest(manifest_path)
        entries = manifest.split("train")
        if not entries:
            raise ValidationException(f"Manifest '{manifest_path}' has no train scenes")

        started = time.perf_counter()
        pool = self.sampler.collect_pool(entries, preprocess, sampling, ensemble.seed)
        sampling_seconds = time.perf_counter() - started

        model, report = train_ensemble(pool, ensemble, training, preprocess, sampling, threads=self.threads)
        report.phase_seconds = {"sampling": sampling_seconds, **report.phase_seconds}
        report.train_seconds += sampling_seconds
        for phase, seconds in report.phase_seconds.items():
            logger.info("Phase %s: %.3fs", phase, seconds)

        save_model(model, model_out)
        report_path = training_report_path(model_out)
        report_path.write_text(report.model_dump_json(indent=2) + "\n", encoding="utf-8")
        if self.registry is not None:
            self.registry.record_model(model, model_out, manifest_path, report.train_seconds)
        return model, report


@dataclass
class PredictedScene:
    scene_id: str
    path: Path
    seconds: float


class PredictionService:
    """Model + scenes -> one mask PNG per scene"""

    def __init__(self, working_size: Sequence[int] = None):
        self.working_size = tuple(working_size or settings.WORKING_SIZE)

    def predict(self, model: ModelFile, entries: Sequence[ManifestEntry], out_dir,
                expected_backend: Optional[str] = None) -> List[PredictedScene]:
        check_backend(model, expected_backend)
        if not entries:
            raise ValidationException("No scenes to predict")
        out_dir = Path(out_dir)
        results = []
        for entry in entries:
            started = time.perf_counter()
            scene = preprocess_scene(load_scene(entry, self.working_size), model.preprocess)
            mask = predict_mask(model, scene)
            seconds = time.perf_counter() - started
            path = out_dir / f"{entry.scene_id}_mask.png"
            write_mask_png(mask.pixels, path)
            results.append(PredictedScene(scene_id=entry.scene_id, path=path, seconds=seconds))
            logger.info("Scene %s: %d oil pixels in %.3fs", entry.scene_id, int(mask.pixels.sum()), seconds)
        return results


class EvaluationService:
    """Model + manifest split -> EvalReport (JSON and optional CSV)"""

    def __init__(self, working_size: Sequence[int] = None):
        self.working_size = tuple(working_size or settings.WORKING_SIZE)

    def evaluate(self, model_path, manifest_path, split: str = "test", repeat: int = 1,
                 expected_backend: Optional[str] = None, report_json=None, report_csv=None) -> EvalReport:
        model = load_model(model_path)
        check_backend(model, expected_backend)
        entries = load_manifest(manifest_path).split(split)
        training_report = load_training_report(model_path)
        report = evaluate_model(
            model,
            entries,
            self.working_size,
            split=split,
            train_seconds=None if training_report is None else training_report.train_seconds,
            repeat=repeat,
        )
        if report_json is not None:
            write_report_json(report, report_json)
        if report_csv is not None:
            write_report_csv(report, report_csv)
        logger.info(
            "%s on %s: IoU %.3f, F1 %.3f, BA %.3f",
            model.backend, split, report.aggregate.iou, report.aggregate.f1, report.aggregate.balanced_accuracy,
        )
        return report


class BenchService:
    """Head-to-head evaluation of several backends on one split"""

    def __init__(self, working_size: Sequence[int] = None, threads: int = 1, registry: Registry = None):
        self.working_size = working_size
        self.threads = threads
        self.registry = registry

    def resolve_models(self, manifest_path, backends: Sequence[str], explicit: Dict[str, str],
                       train_first: bool, out_dir, ensemble: EnsembleConfig, training: TrainingConfig,
                       preprocess: PreprocessConfig, sampling: SamplingConfig) -> Dict[str, Path]:
        """Model path per backend: explicit, freshly trained, or the registry's latest"""
        paths = {}
        for backend in backends:
            if backend in explicit:
                paths[backend] = Path(explicit[backend])
            elif train_first:
                trainer = TrainingService(self.working_size, self.threads, self.registry)
                path = Path(out_dir) / f"{backend}.slkq"
                trainer.train(manifest_path, path, ensemble.model_copy(update={"backend": backend}),
                              training, preprocess, sampling)
                paths[backend] = path
            else:
                found = None if self.registry is None else self.registry.latest_model_path(backend, manifest_path)
                if found is None:
                    raise NotFoundException(
                        f"No trained '{backend}' model for '{manifest_path}'; pass --model {backend}=PATH "
                        f"or --train-first"
                    )
                paths[backend] = Path(found)
        return paths

    def run(self, manifest_path, model_paths: Dict[str, Path], split: str = "test",
            repeat: int = 1) -> Tuple[List[BenchRow], str]:
        evaluator = EvaluationService(self.working_size)
        rows = [
            bench_row(evaluator.evaluate(path, manifest_path, split=split, repeat=repeat, expected_backend=backend))
            for backend, path in model_paths.items()
        ]
        return rows, render_benchmark_table(rows)

    def figures(self, manifest_path, model_paths: Dict[str, Path], out_dir, split: str = "test") -> List[Path]:
        """Comparison panels for every scene of the split, one mask tile per backend"""
        models = {backend: load_model(path) for backend, path in model_paths.items()}
        for backend, model in models.items():
            check_backend(model, backend)
        entries = load_manifest(manifest_path).split(split)
        if not entries:
            raise ValidationException(f"Split '{split}' has no scenes to draw")
        return write_comparison_figures(models, entries, self.working_size or settings.WORKING_SIZE, out_dir)
