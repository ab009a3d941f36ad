"""
Decision functions, bias reconstruction and the SMO dual solver
"""
import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from slickqsvm.core.exceptions import TrainingException, ValidationException
from slickqsvm.engine.features import samples_to_arrays
from slickqsvm.engine.kernels import gram_matrix, kernel_matrix
from slickqsvm.models.domain import LabeledSample, WeakLearner
from slickqsvm.models.schemas import KernelSpec, SvmTrainConfig

logger = logging.getLogger(__name__)

# curvature floor for non-positive-definite working pairs
TAU = 1e-12
BIAS_EPSILON = 1e-8


def decision_values(learner: WeakLearner, X: np.ndarray) -> np.ndarray:
    """f(x) = sum_n alpha_n y_n K(x_n, x) + b for every row of X"""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if learner.n_support == 0:
        return np.full(len(X), learner.bias)
    return kernel_matrix(X, learner.support_x, learner.kernel) @ learner.coefficients + learner.bias


def decision_function(learner: WeakLearner, x) -> float:
    return float(decision_values(learner, np.asarray(x, dtype=np.float64)[None, :])[0])


def predict_labels(values: np.ndarray) -> np.ndarray:
    """sign(f) with f = 0 resolved to water (-1)"""
    return np.where(np.asarray(values) > 0, 1, -1).astype(np.int8)


def training_accuracy(learner: WeakLearner, samples: Sequence[LabeledSample]) -> float:
    X, y = samples_to_arrays(samples)
    if len(y) == 0:
        raise ValidationException("Accuracy needs at least one sample")
    return float(np.mean(predict_labels(decision_values(learner, X)) == y))


def dual_objective(alphas: np.ndarray, y: np.ndarray, gram: np.ndarray) -> float:
    """sum(alpha) - 1/2 sum_nm alpha_n alpha_m y_n y_m K_nm"""
    coefficients = np.asarray(alphas, dtype=np.float64) * np.asarray(y, dtype=np.float64)
    return float(np.sum(alphas) - 0.5 * coefficients @ gram @ coefficients)


def bias_from_alphas(gram: np.ndarray, y: np.ndarray, alphas: np.ndarray, upper: float) -> float:
    """
    Mean of y_n - sum_m alpha_m y_m K_mn over alphas strictly inside (0, upper); falls back to
    all alphas > 0, then to 0.
    """
    alphas = np.asarray(alphas, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    support = alphas > BIAS_EPSILON
    inside = support & (alphas < upper - BIAS_EPSILON)
    chosen = inside if inside.any() else support
    if not chosen.any():
        return 0.0
    margins = gram[chosen] @ (alphas * y)
    return float(np.mean(y[chosen] - margins))


def check_both_classes(y: np.ndarray, context: str = "training set") -> None:
    if len(y) < 2:
        raise TrainingException(f"The {context} needs at least 2 samples, got {len(y)}")
    if not (np.any(y > 0) and np.any(y < 0)):
        raise TrainingException(f"The {context} contains a single class")


@dataclass
class SmoResult:
    alphas: np.ndarray
    converged: bool
    iterations: int


def smo_solve(gram: np.ndarray, y: np.ndarray, box_C: float, tol: float, max_iter: int) -> SmoResult:
    """
    Solve min 1/2 a'Qa - e'a, 0 <= a <= C, y'a = 0 with Q = yy' * K, using second-order
    working-set selection over maximal violating pairs.
    """
    y = np.asarray(y, dtype=np.float64)
    n = len(y)
    Q = gram * np.outer(y, y)
    diag = np.diag(gram).copy()
    alphas = np.zeros(n)
    grad = -np.ones(n)

    for iteration in range(max_iter):
        up = ((y > 0) & (alphas < box_C)) | ((y < 0) & (alphas > 0))
        low = ((y > 0) & (alphas > 0)) | ((y < 0) & (alphas < box_C))
        if not up.any() or not low.any():
            return SmoResult(alphas, True, iteration)
        score = -y * grad

        up_index = np.flatnonzero(up)
        i = int(up_index[np.argmax(score[up])])
        g_max = score[i]
        if g_max - score[low].min() < tol:
            return SmoResult(alphas, True, iteration)

        candidates = np.flatnonzero(low & (score < g_max))
        gain = g_max - score[candidates]
        curvature = diag[i] + diag[candidates] - 2.0 * gram[i, candidates]
        curvature = np.where(curvature > 0, curvature, TAU)
        j = int(candidates[np.argmin(-(gain * gain) / curvature)])

        old_i, old_j = alphas[i], alphas[j]
        if y[i] != y[j]:
            quad = max(diag[i] + diag[j] + 2.0 * Q[i, j], TAU)
            delta = (-grad[i] - grad[j]) / quad
            diff = old_i - old_j
            a_i, a_j = old_i + delta, old_j + delta
            if diff > 0:
                if a_j < 0:
                    a_j, a_i = 0.0, diff
                if a_i > box_C:
                    a_i, a_j = box_C, box_C - diff
            else:
                if a_i < 0:
                    a_i, a_j = 0.0, -diff
                if a_j > box_C:
                    a_j, a_i = box_C, box_C + diff
        else:
            quad = max(diag[i] + diag[j] - 2.0 * Q[i, j], TAU)
            delta = (grad[i] - grad[j]) / quad
            total = old_i + old_j
            a_i, a_j = old_i - delta, old_j + delta
            if total > box_C:
                if a_i > box_C:
                    a_i, a_j = box_C, total - box_C
                if a_j > box_C:
                    a_j, a_i = box_C, total - box_C
            else:
                if a_j < 0:
                    a_j, a_i = 0.0, total
                if a_i < 0:
                    a_i, a_j = 0.0, total

        alphas[i], alphas[j] = a_i, a_j
        grad += Q[:, i] * (a_i - old_i) + Q[:, j] * (a_j - old_j)

    return SmoResult(alphas, False, max_iter)


def smo_train(
    samples: Sequence[LabeledSample],
    kernel: KernelSpec,
    cfg: Optional[SvmTrainConfig] = None,
    gram: Optional[np.ndarray] = None,
) -> WeakLearner:
    """
    Train one soft-margin SVM. `gram` must be given for kind "precomputed" and overrides the
    kernel evaluation otherwise.
    """
    cfg = cfg or SvmTrainConfig()
    X, y = samples_to_arrays(samples)
    check_both_classes(y)
    if gram is None:
        if kernel.kind == "precomputed":
            raise ValidationException("Kernel kind 'precomputed' requires a Gram matrix")
        gram = gram_matrix(X, kernel)
    elif gram.shape != (len(y), len(y)):
        raise ValidationException(f"Gram matrix {gram.shape} does not match {len(y)} samples")

    result = smo_solve(gram, y, cfg.box_C, cfg.smo_tol, cfg.smo_max_passes * len(y))
    if not result.converged:
        logger.warning(
            "SMO stopped after %d updates without reaching tolerance %g; keeping the last iterate",
            result.iterations, cfg.smo_tol,
        )
    bias = bias_from_alphas(gram, y, result.alphas, cfg.box_C)
    return WeakLearner(
        support_x=X,
        support_y=y,
        alphas=result.alphas,
        bias=bias,
        kernel=kernel,
        converged=result.converged,
    )
