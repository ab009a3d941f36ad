"""
Five-qubit statevector simulator and the +/- R_Y rotation kernel built on it
"""
import logging
from dataclasses import replace
from typing import Optional, Sequence

import numpy as np

from slickqsvm.core.exceptions import DimensionMismatchException, ValidationException
from slickqsvm.engine.features import samples_to_arrays
from slickqsvm.engine.kernels import kernel_matrix
from slickqsvm.engine.svm_core import check_both_classes, smo_train
from slickqsvm.models.domain import LabeledSample, StateVector, WeakLearner
from slickqsvm.models.schemas import GateKernelSpec, KernelSpec, SvmTrainConfig

logger = logging.getLogger(__name__)

N_QUBITS = 5


def ry_matrix(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2.0), np.sin(theta / 2.0)
    return np.array([[c, -s], [s, c]])


def _rotate(states: np.ndarray, qubit: int, thetas: np.ndarray) -> np.ndarray:
    """R_Y(thetas[r]) on `qubit` of every state row; qubit 0 is the most significant bit"""
    n_qubits = int(states.shape[1]).bit_length() - 1
    tensor = states.reshape((len(states),) + (2,) * n_qubits)
    tensor = np.moveaxis(tensor, qubit + 1, 1)
    c = np.cos(thetas / 2.0).reshape((-1,) + (1,) * n_qubits)
    s = np.sin(thetas / 2.0).reshape((-1,) + (1,) * n_qubits)
    zero, one = tensor[:, 0:1], tensor[:, 1:2]
    rotated = np.concatenate([c * zero - s * one, s * zero + c * one], axis=1)
    return np.moveaxis(rotated, 1, qubit + 1).reshape(len(states), -1)


def zero_state(n_qubits: int = N_QUBITS) -> StateVector:
    amplitudes = np.zeros(2 ** n_qubits, dtype=np.complex128)
    amplitudes[0] = 1.0
    return StateVector(amplitudes)


def apply_ry(state: StateVector, qubit_index: int, theta: float) -> StateVector:
    if not 0 <= qubit_index < state.n_qubits:
        raise ValidationException(f"Qubit index {qubit_index} outside [0, {state.n_qubits})")
    rotated = _rotate(state.amplitudes[None, :], qubit_index, np.array([theta], dtype=np.float64))
    return StateVector(rotated[0])


def _check_scaled(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != N_QUBITS:
        raise DimensionMismatchException(f"Gate kernel encodes {N_QUBITS} features, got {x.shape[-1]}")
    if x.size and (x.min() < 0.0 or x.max() > 1.0):
        raise ValidationException("Gate kernel inputs must be scaled to [0, 1]")
    return x


def encode(state: StateVector, x, spec: GateKernelSpec, sign: float = 1.0) -> StateVector:
    """R_Y(sign * angle_scale * x_i) on qubit i for every feature"""
    x = _check_scaled(x)
    for qubit, value in enumerate(x):
        state = apply_ry(state, qubit, sign * spec.angle_scale * value)
    return state


def probability_all_zeros(state: StateVector) -> float:
    return float(np.abs(state.amplitudes[0]) ** 2)


def kernel_value(x1, x2, spec: Optional[GateKernelSpec] = None) -> float:
    """Simulate |0> -> R_Y(+theta(x1)) -> R_Y(-theta(x2)) and return P(00000)"""
    spec = spec or GateKernelSpec()
    state = encode(zero_state(spec.n_qubits), x1, spec, sign=1.0)
    state = encode(state, x2, spec, sign=-1.0)
    return probability_all_zeros(state)


def encoded_states(X: np.ndarray, spec: GateKernelSpec) -> np.ndarray:
    """Rows of R_Y(theta(x))|0...0> for a batch of feature vectors"""
    X = np.atleast_2d(_check_scaled(X))
    states = np.zeros((len(X), 2 ** spec.n_qubits), dtype=np.complex128)
    states[:, 0] = 1.0
    for qubit in range(spec.n_qubits):
        states = _rotate(states, qubit, spec.angle_scale * X[:, qubit])
    return states


def quantum_kernel_matrix(A: np.ndarray, B: np.ndarray, spec: GateKernelSpec) -> np.ndarray:
    """
    K[i, j] for two batches. The statevector path uses |<psi(b)|psi(a)>|^2, which equals the
    all-zeros probability of the +/- circuit because R_Y(-theta) is the adjoint of R_Y(theta).
    """
    A = np.atleast_2d(_check_scaled(A))
    B = np.atleast_2d(_check_scaled(B))
    if spec.evaluation == "statevector":
        overlaps = encoded_states(A, spec) @ encoded_states(B, spec).conj().T
        return np.abs(overlaps) ** 2
    return kernel_matrix(A, B, KernelSpec(kind="gate", angle_scale=spec.angle_scale))


def quantum_gram_matrix(xs: np.ndarray, spec: Optional[GateKernelSpec] = None) -> np.ndarray:
    spec = spec or GateKernelSpec()
    xs = np.asarray(xs, dtype=np.float64)
    if xs.size == 0:
        raise ValidationException("Gram matrix needs at least one sample")
    gram = quantum_kernel_matrix(xs, xs, spec)
    gram = (gram + gram.T) / 2.0
    np.fill_diagonal(gram, 1.0)
    return gram


def train_gate_svm(
    samples: Sequence[LabeledSample],
    spec: Optional[GateKernelSpec] = None,
    cfg: Optional[SvmTrainConfig] = None,
) -> WeakLearner:
    """SMO over the quantum Gram matrix; the learner keeps the gate kernel for inference"""
    spec = spec or GateKernelSpec()
    X, y = samples_to_arrays(samples)
    check_both_classes(y)
    learner = smo_train(samples, KernelSpec(kind="precomputed"), cfg, gram=quantum_gram_matrix(X, spec))
    return replace(learner, kernel=KernelSpec(kind="gate", angle_scale=spec.angle_scale))
