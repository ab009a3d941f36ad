import numpy as np
import pytest

from slickqsvm.core.exceptions import DimensionMismatchException, ValidationException
from slickqsvm.engine.kernels import gram_matrix, kernel_matrix, rbf_kernel
from slickqsvm.models.schemas import KernelSpec


def test_rbf_kernel_examples():
    """Identical points give 1; unit squared distance with gamma 1 gives e^-1"""
    x = np.array([0.1, 0.2, 0.3, 0.4, 0.5])
    assert rbf_kernel(x, x, 1.0) == 1.0
    assert rbf_kernel(np.zeros(5), np.eye(5)[0], 1.0) == pytest.approx(np.exp(-1.0))
    assert rbf_kernel(np.zeros(5), np.ones(5), 1e-12) == pytest.approx(1.0)


def test_rbf_kernel_dimension_mismatch():
    """Inputs of different length are rejected"""
    with pytest.raises(DimensionMismatchException):
        rbf_kernel(np.zeros(5), np.zeros(4), 1.0)


def test_kernel_matrix_matches_pointwise(rng):
    """Vectorised kernel rows agree with the pointwise kernel"""
    A, B = rng.random((4, 5)), rng.random((3, 5))
    spec = KernelSpec(rbf_gamma=0.7)
    K = kernel_matrix(A, B, spec)
    for i in range(4):
        for j in range(3):
            assert K[i, j] == pytest.approx(rbf_kernel(A[i], B[j], 0.7), abs=1e-12)


def test_gram_single_sample():
    """One sample gives the 1x1 matrix [1]"""
    np.testing.assert_array_equal(gram_matrix(np.full((1, 5), 0.3), KernelSpec()), [[1.0]])


def test_gram_symmetric_and_psd(rng):
    """RBF Gram matrices are symmetric with unit diagonal and PSD on random sets"""
    spec = KernelSpec(rbf_gamma=1.0)
    for _ in range(100):
        gram = gram_matrix(rng.random((20, 5)), spec)
        np.testing.assert_allclose(gram, gram.T, atol=1e-12)
        np.testing.assert_array_equal(np.diag(gram), 1.0)
        assert np.linalg.eigvalsh(gram).min() >= -1e-9


def test_gram_precomputed_and_errors():
    """Precomputed input is symmetrised; empty input and feature evaluation are refused"""
    raw = np.array([[1.0, 0.2], [0.4, 1.0]])
    np.testing.assert_allclose(gram_matrix(raw, KernelSpec(kind="precomputed")), [[1.0, 0.3], [0.3, 1.0]])
    with pytest.raises(ValidationException):
        gram_matrix(np.empty((0, 5)), KernelSpec())
    with pytest.raises(ValidationException):
        kernel_matrix(np.zeros((2, 5)), np.zeros((2, 5)), KernelSpec(kind="precomputed"))
    with pytest.raises(DimensionMismatchException):
        gram_matrix(np.zeros((2, 3)), KernelSpec(kind="precomputed"))
