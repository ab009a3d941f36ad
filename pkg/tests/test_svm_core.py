import numpy as np
import pytest
from sklearn.svm import SVC

from slickqsvm.core.exceptions import TrainingException, ValidationException
from slickqsvm.engine.kernels import gram_matrix, rbf_kernel
from slickqsvm.engine.svm_core import (
    bias_from_alphas,
    decision_function,
    decision_values,
    dual_objective,
    predict_labels,
    smo_solve,
    smo_train,
    training_accuracy,
)
from slickqsvm.models.domain import LabeledSample, WeakLearner
from slickqsvm.models.schemas import KernelSpec, SvmTrainConfig

from tests.conftest import make_random_samples


def _learner(rng, n=6, bias=0.0):
    return WeakLearner(
        support_x=rng.random((n, 5)),
        support_y=np.array([1, -1] * (n // 2)),
        alphas=rng.random(n) * 3.0,
        bias=bias,
        kernel=KernelSpec(rbf_gamma=1.3),
    )


def test_zero_alphas_return_bias(rng):
    """With every alpha at 0 the decision value is the bias"""
    learner = WeakLearner(rng.random((4, 5)), np.array([1, -1, 1, -1]), np.zeros(4), 0.7)
    np.testing.assert_allclose(decision_values(learner, rng.random((10, 5))), 0.7)


def test_empty_support_returns_bias(rng):
    """An empty support set evaluates to the bias alone"""
    learner = WeakLearner(np.empty((0, 5)), np.empty(0), np.empty(0), -0.4)
    assert decision_function(learner, rng.random(5)) == -0.4


def test_symmetric_learner_tie_goes_to_water():
    """The midpoint of a symmetric two-point learner scores 0 and is water"""
    d = np.array([0.2, 0.0, 0.0, 0.0, 0.0])
    center = np.full(5, 0.5)
    learner = WeakLearner(np.stack([center + d, center - d]), np.array([1, -1]), np.array([1.0, 1.0]), 0.0)
    value = decision_function(learner, center)
    assert value == pytest.approx(0.0, abs=1e-12)
    assert predict_labels(np.array([0.0]))[0] == -1


def test_decision_matches_explicit_sum(rng):
    """decision_function equals the kernel expansion written out term by term"""
    learner = _learner(rng, bias=0.25)
    x = rng.random(5)
    expected = sum(
        a * y * rbf_kernel(sx, x, 1.3) for a, y, sx in zip(learner.alphas, learner.support_y, learner.support_x)
    ) + 0.25
    assert decision_function(learner, x) == pytest.approx(expected, abs=1e-12)


def test_decision_permutation_invariant(rng):
    """Reordering the support set leaves decisions unchanged"""
    learner = _learner(rng, n=8)
    order = rng.permutation(8)
    shuffled = WeakLearner(
        learner.support_x[order], learner.support_y[order], learner.alphas[order], learner.bias, learner.kernel
    )
    X = rng.random((5, 5))
    np.testing.assert_allclose(decision_values(learner, X), decision_values(shuffled, X), atol=1e-12)


def test_two_point_problem_solved_by_hand():
    """Opposite points get equal alphas 1/(1-k) and unit margins"""
    samples = [LabeledSample(np.zeros(5), -1), LabeledSample(np.eye(5)[0], 1)]
    kernel = KernelSpec(rbf_gamma=0.1)
    learner = smo_train(samples, kernel, SvmTrainConfig(box_C=100.0))
    k = np.exp(-0.1)
    np.testing.assert_allclose(learner.alphas, [1.0 / (1.0 - k)] * 2, rtol=1e-6)
    assert decision_function(learner, samples[1].x) == pytest.approx(1.0, abs=1e-6)
    assert decision_function(learner, samples[0].x) == pytest.approx(-1.0, abs=1e-6)


def test_two_point_problem_matches_grid_search():
    """For two samples SMO reaches the best objective on a dense alpha grid"""
    samples = [LabeledSample(np.zeros(5), -1), LabeledSample(np.eye(5)[0], 1)]
    gram = gram_matrix(np.stack([s.x for s in samples]), KernelSpec(rbf_gamma=0.1))
    y = np.array([-1, 1])
    learner = smo_train(samples, KernelSpec(rbf_gamma=0.1), SvmTrainConfig(box_C=3.0))
    grid = np.linspace(0.0, 3.0, 3001)
    best = max(dual_objective(np.array([a, a]), y, gram) for a in grid)
    assert dual_objective(learner.alphas, y, gram) >= best - 1e-9
    np.testing.assert_allclose(learner.alphas, [3.0, 3.0])


def test_contradictory_points_hit_the_bound():
    """Identical features with opposite labels push both alphas to C"""
    x = np.full(5, 0.4)
    learner = smo_train([LabeledSample(x, 1), LabeledSample(x, -1)], KernelSpec(), SvmTrainConfig(box_C=3.0))
    np.testing.assert_allclose(learner.alphas, [3.0, 3.0])
    assert learner.bias == pytest.approx(0.0)


def test_smo_constraints_on_random_problems(rng):
    """Box and equality constraints hold on 50 random 10-sample problems"""
    cfg = SvmTrainConfig(box_C=3.0)
    for _ in range(50):
        samples = make_random_samples(rng, 10)
        learner = smo_train(samples, KernelSpec(), cfg)
        assert np.all(learner.alphas >= 0.0)
        assert np.all(learner.alphas <= 3.0)
        assert abs(np.dot(learner.alphas, learner.support_y)) <= 1e-9


def test_smo_matches_libsvm_objective(rng):
    """Dual objective agrees with sklearn's precomputed-kernel SVC"""
    for _ in range(20):
        samples = make_random_samples(rng, 12)
        X = np.stack([s.x for s in samples])
        y = np.array([s.y for s in samples], dtype=float)
        gram = gram_matrix(X, KernelSpec())
        ours = smo_solve(gram, y, 3.0, 1e-6, 10000)

        reference = SVC(kernel="precomputed", C=3.0, tol=1e-8).fit(gram, y)
        alphas = np.zeros(len(y))
        alphas[reference.support_] = np.abs(reference.dual_coef_[0])

        expected = dual_objective(alphas, y, gram)
        assert ours.converged
        assert dual_objective(ours.alphas, y, gram) == pytest.approx(expected, rel=1e-4, abs=1e-6)


def test_bias_fallback_chain(rng):
    """In-bound alphas define the bias; otherwise all supports; otherwise 0"""
    gram = gram_matrix(rng.random((4, 5)), KernelSpec())
    y = np.array([1.0, -1.0, 1.0, -1.0])
    assert bias_from_alphas(gram, y, np.zeros(4), 3.0) == 0.0

    alphas = np.array([0.0, 1.5, 3.0, 1.5])
    inside = np.array([False, True, False, True])
    expected = np.mean(y[inside] - gram[inside] @ (alphas * y))
    assert bias_from_alphas(gram, y, alphas, 3.0) == pytest.approx(expected, abs=1e-12)

    at_bound = np.array([3.0, 3.0, 0.0, 0.0])
    support = at_bound > 0
    expected = np.mean(y[support] - gram[support] @ (at_bound * y))
    assert bias_from_alphas(gram, y, at_bound, 3.0) == pytest.approx(expected, abs=1e-12)


def test_symmetric_problem_has_zero_bias():
    """Mirror-image samples give b = 0"""
    center = np.full(5, 0.5)
    d = np.array([0.0, 0.1, 0.0, 0.0, 0.0])
    samples = [LabeledSample(center + d, 1), LabeledSample(center - d, -1)]
    learner = smo_train(samples, KernelSpec(), SvmTrainConfig(box_C=3.0))
    assert learner.bias == pytest.approx(0.0, abs=1e-12)


def test_blob_accuracy(blob_samples):
    """Two separated blobs are learned with accuracy >= 0.95"""
    learner = smo_train(blob_samples, KernelSpec(), SvmTrainConfig())
    assert learner.converged
    assert training_accuracy(learner, blob_samples) >= 0.95


def test_single_class_and_missing_gram(rng):
    """Single-class sets and precomputed kernels without a Gram matrix are refused"""
    samples = [LabeledSample(rng.random(5), 1) for _ in range(4)]
    with pytest.raises(TrainingException):
        smo_train(samples, KernelSpec())
    with pytest.raises(ValidationException):
        smo_train(make_random_samples(rng, 4), KernelSpec(kind="precomputed"))
