"""
Kernel functions and Gram matrices for the RBF and gate (closed-form) kernels
"""
import numpy as np
from sklearn.metrics.pairwise import rbf_kernel as pairwise_rbf

from slickqsvm.core.exceptions import DimensionMismatchException, ValidationException
from slickqsvm.models.schemas import KernelSpec


def _pair(x1, x2):
    x1 = np.asarray(x1, dtype=np.float64)
    x2 = np.asarray(x2, dtype=np.float64)
    if x1.shape != x2.shape:
        raise DimensionMismatchException(f"Kernel inputs differ in shape: {x1.shape} vs {x2.shape}")
    return x1, x2


def rbf_kernel(x1, x2, gamma: float) -> float:
    """exp(-gamma * ||x1 - x2||^2)"""
    x1, x2 = _pair(x1, x2)
    return float(np.exp(-gamma * np.sum((x1 - x2) ** 2)))


def gate_kernel_closed_form(x1, x2, angle_scale: float = np.pi) -> float:
    """All-zeros probability of the +/- R_Y circuit: prod_i cos^2((theta_i(x1) - theta_i(x2)) / 2)"""
    x1, x2 = _pair(x1, x2)
    return float(np.prod(np.cos(angle_scale * (x1 - x2) / 2.0) ** 2))


def kernel_matrix(A: np.ndarray, B: np.ndarray, spec: KernelSpec) -> np.ndarray:
    """K[i, j] = k(A[i], B[j]) for kernels defined on feature vectors"""
    A = np.atleast_2d(np.asarray(A, dtype=np.float64))
    B = np.atleast_2d(np.asarray(B, dtype=np.float64))
    if A.shape[1] != B.shape[1]:
        raise DimensionMismatchException(f"Kernel inputs differ in dimension: {A.shape[1]} vs {B.shape[1]}")
    if spec.kind == "rbf":
        return pairwise_rbf(A, B, gamma=spec.rbf_gamma)
    if spec.kind == "gate":
        half_angles = spec.angle_scale * (A[:, None, :] - B[None, :, :]) / 2.0
        return np.prod(np.cos(half_angles) ** 2, axis=-1)
    raise ValidationException("A precomputed kernel cannot be evaluated on feature vectors")


def gram_matrix(xs: np.ndarray, spec: KernelSpec) -> np.ndarray:
    """
    Symmetric Gram matrix of `xs`. With kind "precomputed", `xs` already is the Gram matrix and
    is only validated and symmetrized.
    """
    xs = np.asarray(xs, dtype=np.float64)
    if xs.size == 0:
        raise ValidationException("Gram matrix needs at least one sample")
    if spec.kind == "precomputed":
        if xs.ndim != 2 or xs.shape[0] != xs.shape[1]:
            raise DimensionMismatchException(f"Precomputed kernel must be square, got {xs.shape}")
        return (xs + xs.T) / 2.0
    gram = kernel_matrix(xs, xs, spec)
    gram = (gram + gram.T) / 2.0
    # both feature kernels have k(x, x) = 1
    np.fill_diagonal(gram, 1.0)
    return gram
