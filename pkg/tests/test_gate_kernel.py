import numpy as np
import pytest

from slickqsvm.core.exceptions import ValidationException
from slickqsvm.engine.gate_kernel import (
    apply_ry,
    kernel_value,
    quantum_gram_matrix,
    quantum_kernel_matrix,
    ry_matrix,
    train_gate_svm,
    zero_state,
)
from slickqsvm.engine.kernels import gate_kernel_closed_form
from slickqsvm.engine.svm_core import decision_function, smo_train, training_accuracy
from slickqsvm.models.domain import LabeledSample, StateVector
from slickqsvm.models.schemas import GateKernelSpec, KernelSpec, SvmTrainConfig


def _random_state(rng):
    amplitudes = rng.normal(size=32) + 1j * rng.normal(size=32)
    return StateVector(amplitudes / np.linalg.norm(amplitudes))


def test_ry_zero_is_identity(rng):
    """R_Y(0) leaves any state unchanged"""
    state = _random_state(rng)
    np.testing.assert_allclose(apply_ry(state, 2, 0.0).amplitudes, state.amplitudes, atol=1e-15)


def test_ry_pi_flips_qubit():
    """R_Y(pi)|0> = |1>; qubit 0 is the most significant bit"""
    flipped = apply_ry(zero_state(), 0, np.pi)
    assert abs(flipped.amplitudes[16]) == pytest.approx(1.0)
    assert abs(flipped.amplitudes[0]) == pytest.approx(0.0, abs=1e-12)
    assert abs(apply_ry(zero_state(), 4, np.pi).amplitudes[1]) == pytest.approx(1.0)


def test_ry_matches_dense_operator(rng):
    """apply_ry equals the 2x2 rotation Kronecker-embedded at the qubit's position"""
    state = _random_state(rng)
    for qubit in range(5):
        operator = np.kron(np.kron(np.eye(2 ** qubit), ry_matrix(0.7)), np.eye(2 ** (4 - qubit)))
        np.testing.assert_allclose(
            apply_ry(state, qubit, 0.7).amplitudes, operator @ state.amplitudes, atol=1e-12
        )


def test_ry_composes_additively(rng):
    """R_Y(a) then R_Y(b) equals R_Y(a + b)"""
    state = _random_state(rng)
    twice = apply_ry(apply_ry(state, 3, 0.4), 3, 1.1)
    np.testing.assert_allclose(twice.amplitudes, apply_ry(state, 3, 1.5).amplitudes, atol=1e-12)


def test_norm_preserved_and_index_checked(rng):
    """Arbitrary rotation sequences keep unit norm; bad qubit indices fail"""
    state = zero_state()
    for _ in range(50):
        state = apply_ry(state, int(rng.integers(0, 5)), float(rng.uniform(-4, 4)))
    assert np.sum(np.abs(state.amplitudes) ** 2) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValidationException):
        apply_ry(state, 5, 0.1)


def test_kernel_value_examples(rng):
    """Equal inputs give 1; a pi difference on one qubit gives 0; random pairs match the closed form"""
    x = rng.random(5)
    assert kernel_value(x, x) == pytest.approx(1.0, abs=1e-12)
    a, b = np.zeros(5), np.zeros(5)
    b[0] = 1.0
    assert kernel_value(a, b) == pytest.approx(0.0, abs=1e-12)
    for _ in range(50):
        x1, x2 = rng.random(5), rng.random(5)
        assert kernel_value(x1, x2) == pytest.approx(gate_kernel_closed_form(x1, x2), abs=1e-12)
        assert kernel_value(x1, x2) == pytest.approx(kernel_value(x2, x1), abs=1e-12)


def test_kernel_value_rejects_unscaled_inputs():
    """Features outside [0, 1] are refused"""
    with pytest.raises(ValidationException):
        kernel_value(np.full(5, 1.5), np.zeros(5))


def test_statevector_matches_closed_form(rng):
    """Both evaluation paths agree on 10,000 random pairs"""
    A, B = rng.random((100, 5)), rng.random((100, 5))
    simulated = quantum_kernel_matrix(A, B, GateKernelSpec(evaluation="statevector"))
    closed = quantum_kernel_matrix(A, B, GateKernelSpec(evaluation="closed_form"))
    np.testing.assert_allclose(simulated, closed, atol=1e-12)


def test_quantum_gram_examples(rng):
    """Duplicates give all ones, one sample gives [1], random sets are PSD in [0, 1]"""
    np.testing.assert_allclose(quantum_gram_matrix(np.tile(rng.random(5), (4, 1))), np.ones((4, 4)), atol=1e-12)
    np.testing.assert_array_equal(quantum_gram_matrix(rng.random((1, 5))), [[1.0]])
    gram = quantum_gram_matrix(rng.random((20, 5)))
    np.testing.assert_allclose(gram, gram.T, atol=1e-12)
    assert gram.min() >= 0.0 and gram.max() <= 1.0
    assert np.linalg.eigvalsh(gram).min() >= -1e-9


def test_gate_svm_two_points():
    """A separable pair is classified correctly and the learner keeps the gate kernel"""
    samples = [LabeledSample(np.full(5, 0.2), -1), LabeledSample(np.full(5, 0.8), 1)]
    learner = train_gate_svm(samples)
    assert learner.kernel.kind == "gate"
    assert decision_function(learner, samples[0].x) < 0
    assert decision_function(learner, samples[1].x) > 0


def test_gate_svm_inference_replays_the_circuit(rng, blob_samples):
    """Inference through the stored kernel equals the sum over simulated kernel values"""
    learner = train_gate_svm(blob_samples)
    x = rng.random(5)
    expected = sum(
        a * y * kernel_value(sx, x) for a, y, sx in zip(learner.alphas, learner.support_y, learner.support_x)
    ) + learner.bias
    assert decision_function(learner, x) == pytest.approx(expected, abs=1e-10)


def test_gate_svm_blob_accuracy_and_determinism(blob_samples):
    """Blob accuracy is within 2 points of RBF SMO; retraining gives the same learner"""
    gate = train_gate_svm(blob_samples, cfg=SvmTrainConfig())
    rbf = smo_train(blob_samples, KernelSpec(), SvmTrainConfig())
    assert training_accuracy(gate, blob_samples) >= training_accuracy(rbf, blob_samples) - 0.02
    again = train_gate_svm(blob_samples, cfg=SvmTrainConfig())
    np.testing.assert_array_equal(gate.alphas, again.alphas)
    assert gate.bias == again.bias
