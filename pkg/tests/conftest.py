import numpy as np
import pytest

from slickqsvm.engine.synthetic import MANIFEST_NAME, generate_synthetic_dataset
from slickqsvm.models.domain import FeatureScaler, LabeledSample, ModelFile, WeakLearner
from slickqsvm.models.schemas import AnnealConfig, KernelSpec, SynthConfig, TrainingConfig


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="also run tests marked slow")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: benchmark-sized runs, skipped unless --runslow is given")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


def make_blobs(rng, n_per_class=20, spread=0.05, centers=(0.25, 0.75)):
    """Two well separated Gaussian blobs in [0, 1]^5, water around centers[0], oil around centers[1]"""
    samples = []
    for label, center in ((-1, centers[0]), (1, centers[1])):
        points = np.clip(rng.normal(center, spread, size=(n_per_class, 5)), 0.0, 1.0)
        samples.extend(LabeledSample(x=point, y=label) for point in points)
    order = rng.permutation(len(samples))
    return [samples[i] for i in order]


def make_random_samples(rng, n):
    labels = np.array([1, -1] + list(rng.choice([1, -1], size=n - 2)))
    return [LabeledSample(x=rng.random(5), y=int(label)) for label in labels]


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def blob_samples(rng):
    return make_blobs(rng)


@pytest.fixture
def fast_training():
    """Annealing budget small enough for unit tests"""
    return TrainingConfig(anneal=AnnealConfig(num_reads=40, top_samples=5, sweeps_per_read=200))


@pytest.fixture
def synth_config():
    return SynthConfig(
        n_scenes=6,
        size=32,
        slick_count_range=(1, 2),
        slick_axes_range=(0.2, 0.35),
        test_scenes=2,
        seed=7,
    )


@pytest.fixture
def synth_dataset(tmp_path, synth_config):
    """Small synthetic dataset on disk; returns the manifest path"""
    out_dir = tmp_path / "synth"
    generate_synthetic_dataset(synth_config, out_dir)
    return out_dir / MANIFEST_NAME


@pytest.fixture
def registry_url(tmp_path):
    return f"sqlite:///{tmp_path / 'registry.db'}"


def make_constant_model(n_learners=3, bias=1.0, backend="classical"):
    """Learners with all alphas at 0, so every decision value equals `bias`"""
    kind = "gate" if backend == "gate_kernel" else "rbf"
    learners = [
        WeakLearner(np.full((2, 5), 0.5), np.array([1, -1]), np.zeros(2), bias, KernelSpec(kind=kind))
        for _ in range(n_learners)
    ]
    return ModelFile(
        backend=backend,
        scaler=FeatureScaler(shift=np.zeros(5), scale=np.ones(5)),
        learners=learners,
        subset_size=2,
        aggregation="mean_decision",
        rng_seed=0,
        requested_learners=n_learners,
    )
