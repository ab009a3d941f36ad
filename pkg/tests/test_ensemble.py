from dataclasses import replace

import numpy as np
import pytest

from slickqsvm.core.exceptions import BackendMismatchException, TrainingException, ValidationException
from slickqsvm.engine.ensemble import (
    aggregate,
    aggregate_decisions,
    ensemble_decisions,
    partition_disjoint_subsets,
    plan_partition,
    predict_mask,
    train_ensemble,
)
from slickqsvm.engine.features import apply_scaler, extract_feature_image, fit_scaler, samples_to_arrays
from slickqsvm.engine.svm_core import decision_values, smo_train, training_accuracy
from slickqsvm.io.model_file import encode_model
from slickqsvm.models.domain import LabeledSample, SarScene
from slickqsvm.models.schemas import (
    EnsembleConfig,
    GateKernelSpec,
    KernelSpec,
    SvmTrainConfig,
    TrainingConfig,
)

from tests.conftest import make_blobs, make_constant_model, make_random_samples


def _pool_with_oil(rng, n, n_oil):
    labels = [1] * n_oil + [-1] * (n - n_oil)
    return [LabeledSample(rng.random(5), y) for y in labels]


def _scene(rng, land=None):
    return SarScene("s", rng.random((12, 12)), rng.random((12, 12)), land_mask=land, preprocessed=True)


def test_partition_floor_rule_and_disjointness(rng):
    """85 samples with subset_size 40 give two disjoint subsets and 5 discarded samples"""
    pool = make_random_samples(rng, 85)
    plan = plan_partition(pool, EnsembleConfig(subset_size=40, n_learners=10))
    assert [len(subset) for subset in plan.subsets] == [40, 40]
    assert plan.discarded == 5
    ids = [id(sample) for subset in plan.subsets for sample in subset]
    assert len(ids) == len(set(ids))


def test_partition_caps_at_n_learners(rng):
    """Never more subsets than requested learners"""
    pool = make_random_samples(rng, 200)
    assert len(partition_disjoint_subsets(pool, EnsembleConfig(subset_size=40, n_learners=3))) == 3


def test_partition_single_oil_sample(rng):
    """One oil sample cannot be shared: the subset without it is dropped"""
    pool = _pool_with_oil(rng, 80, 1)
    plan = plan_partition(pool, EnsembleConfig(subset_size=40))
    assert len(plan.subsets) == 1
    assert plan.dropped == 1
    assert any(sample.y == 1 for sample in plan.subsets[0])


def test_partition_repair_keeps_both_classes(rng):
    """With two oil samples every subset ends up with both classes and stays disjoint"""
    for seed in range(10):
        pool = _pool_with_oil(rng, 80, 2)
        plan = plan_partition(pool, EnsembleConfig(subset_size=40, seed=seed))
        assert plan.dropped == 0
        for subset in plan.subsets:
            assert {sample.y for sample in subset} == {1, -1}
        ids = [id(sample) for subset in plan.subsets for sample in subset]
        assert len(ids) == len(set(ids)) == 80


def test_partition_deterministic_and_too_small_pool(rng):
    """The seed fixes the partition; pools smaller than one subset are refused"""
    pool = make_random_samples(rng, 120)
    cfg = EnsembleConfig(subset_size=40, seed=5)
    first = [[id(s) for s in subset] for subset in partition_disjoint_subsets(pool, cfg)]
    second = [[id(s) for s in subset] for subset in partition_disjoint_subsets(pool, cfg)]
    assert first == second
    with pytest.raises(TrainingException):
        partition_disjoint_subsets(pool[:10], cfg)


def test_aggregate_examples():
    """Majority and mean rules, with ties resolved to water"""
    assert aggregate([1.0, 1.0, -1.0], "majority_vote") == 1
    assert aggregate([3.0, -1.0, -1.0], "mean_decision") == 1
    assert aggregate([1.0, -1.0], "mean_decision") == -1
    assert aggregate([1.0, -1.0], "majority_vote") == -1
    with pytest.raises(ValidationException):
        aggregate([], "mean_decision")
    with pytest.raises(ValidationException):
        aggregate([1.0], "weighted")


def test_rules_agree_when_learners_agree(rng):
    """Unanimous learners give the same answer under both rules"""
    decisions = np.abs(rng.normal(size=(7, 50))) * np.where(rng.random(50) < 0.5, 1.0, -1.0)
    np.testing.assert_array_equal(
        aggregate_decisions(decisions, "mean_decision"), aggregate_decisions(decisions, "majority_vote")
    )


def test_single_learner_equals_smo(rng):
    """A one-learner classical ensemble is smo_train on the scaled subset"""
    pool = make_blobs(rng, n_per_class=30)
    cfg = EnsembleConfig(n_learners=1, subset_size=40, seed=2)
    model, report = train_ensemble(pool, cfg)
    assert model.n_learners == 1 and report.learners_trained == 1

    X, _ = samples_to_arrays(pool)
    scaler = fit_scaler(X)
    scaled = [LabeledSample(x, s.y) for s, x in zip(pool, apply_scaler(scaler, X))]
    subset = partition_disjoint_subsets(scaled, cfg)[0]
    expected = smo_train(subset, KernelSpec(), SvmTrainConfig())
    np.testing.assert_array_equal(model.learners[0].alphas, expected.alphas)
    assert model.learners[0].bias == expected.bias


def test_training_is_deterministic_across_threads(rng):
    """Same pool and seed give byte-identical models for any thread count"""
    pool = make_blobs(rng, n_per_class=60)
    cfg = EnsembleConfig(n_learners=3, subset_size=40, seed=4)
    serial, _ = train_ensemble(pool, cfg, threads=1)
    threaded, _ = train_ensemble(pool, cfg, threads=3)
    assert encode_model(serial) == encode_model(threaded)


def test_learners_beat_chance_on_their_subsets(rng):
    """Every trained learner classifies its own subset better than chance"""
    pool = make_blobs(rng, n_per_class=60, spread=0.15)
    cfg = EnsembleConfig(n_learners=3, subset_size=40, seed=1)
    model, _ = train_ensemble(pool, cfg)
    X, _ = samples_to_arrays(pool)
    scaled = [LabeledSample(x, s.y) for s, x in zip(pool, apply_scaler(model.scaler, X))]
    for learner, subset in zip(model.learners, partition_disjoint_subsets(scaled, cfg)):
        assert training_accuracy(learner, subset) > 0.5


def test_annealed_and_gate_backends_train(rng, fast_training):
    """Both quantum-assisted backends produce one learner per subset with the right kernel"""
    pool = make_blobs(rng, n_per_class=40)
    annealed, _ = train_ensemble(pool, EnsembleConfig(n_learners=2, backend="annealed"), fast_training)
    assert annealed.n_learners == 2
    assert all(learner.alphas.max() <= 3.0 for learner in annealed.learners)
    gate, _ = train_ensemble(pool, EnsembleConfig(n_learners=2, backend="gate_kernel"))
    assert all(learner.kernel.kind == "gate" for learner in gate.learners)


def test_annealed_backend_requires_matching_box(rng):
    """box_C must equal alpha_max for the annealed backend"""
    training = TrainingConfig(svm=SvmTrainConfig(box_C=1.0))
    with pytest.raises(ValidationException):
        train_ensemble(make_blobs(rng), EnsembleConfig(n_learners=1, backend="annealed"), training)


def test_pool_without_oil_cannot_train(rng):
    """No oil anywhere leaves no trainable subset"""
    pool = _pool_with_oil(rng, 80, 0)
    with pytest.raises(TrainingException, match="No trainable subset"):
        train_ensemble(pool, EnsembleConfig(subset_size=40))


def test_positive_bias_model_marks_water_as_oil_except_land(rng):
    """alpha = 0 and b = +1 everywhere give oil on every non-land pixel"""
    land = np.zeros((12, 12), dtype=bool)
    land[:3] = True
    mask = predict_mask(make_constant_model(), _scene(rng, land))
    assert mask.pixels.shape == (12, 12)
    assert mask.pixels[~land].all()
    assert not mask.pixels[land].any()


def test_all_land_scene_predicts_water(rng):
    """A scene with no valid pixels yields an all-false mask"""
    mask = predict_mask(make_constant_model(), _scene(rng, np.ones((12, 12), dtype=bool)))
    assert not mask.pixels.any()


def test_single_learner_mask_is_its_sign(rng):
    """With one learner the mask is the sign of its decision function"""
    pool = make_blobs(rng, n_per_class=20)
    model, _ = train_ensemble(pool, EnsembleConfig(n_learners=1, subset_size=40))
    scene = _scene(rng)
    X = apply_scaler(model.scaler, extract_feature_image(scene).features.reshape(-1, 5))
    expected = (decision_values(model.learners[0], X) > 0).reshape(12, 12)
    np.testing.assert_array_equal(predict_mask(model, scene).pixels, expected)


def test_mask_invariant_to_learner_order(rng):
    """Permuting learners never changes the mask"""
    pool = make_blobs(rng, n_per_class=60, spread=0.2)
    model, _ = train_ensemble(pool, EnsembleConfig(n_learners=3, subset_size=40))
    reversed_model = replace(model, learners=model.learners[::-1])
    scene = _scene(rng)
    for rule in ("mean_decision", "majority_vote"):
        np.testing.assert_array_equal(
            predict_mask(replace(model, aggregation=rule), scene).pixels,
            predict_mask(replace(reversed_model, aggregation=rule), scene).pixels,
        )


def test_chunking_does_not_change_decisions(rng):
    """Pixel chunk size only affects memory use"""
    model, _ = train_ensemble(make_blobs(rng, n_per_class=40), EnsembleConfig(n_learners=2, subset_size=40))
    X = rng.random((97, 5))
    np.testing.assert_allclose(
        ensemble_decisions(model, X, chunk_elements=50), ensemble_decisions(model, X, chunk_elements=10**7), atol=1e-12
    )


def test_statevector_inference_matches_closed_form(rng):
    """Gate models give the same mask whichever kernel evaluation path is configured"""
    model, _ = train_ensemble(make_blobs(rng, n_per_class=40), EnsembleConfig(n_learners=2, backend="gate_kernel"))
    simulated = replace(model, training=TrainingConfig(gate=GateKernelSpec(evaluation="statevector")))
    scene = _scene(rng)
    np.testing.assert_array_equal(predict_mask(model, scene).pixels, predict_mask(simulated, scene).pixels)


def test_prediction_guards(rng):
    """Backend mismatches and unpreprocessed scenes are refused"""
    model = make_constant_model()
    with pytest.raises(BackendMismatchException):
        predict_mask(model, _scene(rng), expected_backend="gate_kernel")
    mixed = replace(make_constant_model(backend="gate_kernel"), backend="classical")
    with pytest.raises(BackendMismatchException):
        predict_mask(mixed, _scene(rng))
    raw = SarScene("raw", rng.random((12, 12)), rng.random((12, 12)))
    with pytest.raises(ValidationException):
        predict_mask(model, raw)
