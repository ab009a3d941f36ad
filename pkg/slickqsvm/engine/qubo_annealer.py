"""
QUBO encoding of the SVM dual, exhaustive and simulated-annealing solvers, and decoding
"""
import logging
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from numba import njit

from slickqsvm.core.exceptions import DimensionMismatchException, ValidationException
from slickqsvm.engine.features import samples_to_arrays
from slickqsvm.engine.kernels import gram_matrix
from slickqsvm.engine.svm_core import bias_from_alphas, check_both_classes
from slickqsvm.models.domain import LabeledSample, QuboProblem, WeakLearner
from slickqsvm.models.schemas import AnnealConfig, BinaryEncoding, KernelSpec

logger = logging.getLogger(__name__)

MAX_BRUTE_FORCE_VARS = 24
_BRUTE_FORCE_CHUNK = 1 << 16

AnnealSample = Tuple[np.ndarray, float]


def svm_energy(alphas: np.ndarray, y: np.ndarray, gram: np.ndarray, xi: float) -> float:
    """E(alpha) = 1/2 sum_nm alpha_n alpha_m y_n y_m (K_nm + 2 xi) - sum_n alpha_n"""
    coefficients = np.asarray(alphas, dtype=np.float64) * np.asarray(y, dtype=np.float64)
    return float(0.5 * coefficients @ (gram + 2.0 * xi) @ coefficients - np.sum(alphas))


def build_qubo_from_gram(gram: np.ndarray, y: np.ndarray, enc: BinaryEncoding) -> QuboProblem:
    """
    Expand E over the positional encoding alpha_n = sum_k B^k a_{Kn+k} into an upper-triangular QUBO.
    """
    y = np.asarray(y, dtype=np.float64)
    powers = float(enc.base) ** np.arange(enc.bits_per_alpha)
    coupling = np.outer(y, y) * (gram + 2.0 * enc.penalty)
    full = 0.5 * np.kron(coupling, np.outer(powers, powers))

    # a_i^2 = a_i folds the linear term onto the diagonal; i < j collects both symmetric halves
    matrix = 2.0 * np.triu(full, k=1)
    np.fill_diagonal(matrix, np.diag(full) - np.tile(powers, len(y)))
    return QuboProblem(matrix)


def build_qubo(samples: Sequence[LabeledSample], kernel: KernelSpec, enc: BinaryEncoding) -> QuboProblem:
    X, y = samples_to_arrays(samples)
    check_both_classes(y, context="QUBO training subset")
    return build_qubo_from_gram(gram_matrix(X, kernel), y, enc)


def _energies(matrix: np.ndarray, states: np.ndarray) -> np.ndarray:
    states = states.astype(np.float64)
    return np.einsum("ri,ri->r", states @ matrix, states)


def qubo_energy(q: QuboProblem, bits) -> float:
    """sum_{i<=j} Q_ij a_i a_j"""
    bits = np.asarray(bits)
    if bits.shape != (q.n_vars,):
        raise DimensionMismatchException(f"Bitstring has length {bits.size}, QUBO has {q.n_vars} variables")
    return float(_energies(q.matrix, bits[None, :])[0])


def brute_force_solve(q: QuboProblem) -> Tuple[np.ndarray, float]:
    """Exact minimum by enumeration; ties go to the lexicographically smallest bitstring"""
    n = q.n_vars
    if n > MAX_BRUTE_FORCE_VARS:
        raise ValidationException(f"Brute force is limited to {MAX_BRUTE_FORCE_VARS} variables, got {n}")
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    best_bits, best_energy = np.zeros(n, dtype=np.int8), np.inf
    for start in range(0, 1 << n, _BRUTE_FORCE_CHUNK):
        codes = np.arange(start, min(start + _BRUTE_FORCE_CHUNK, 1 << n), dtype=np.int64)
        states = ((codes[:, None] >> shifts[None, :]) & 1).astype(np.int8)
        energies = _energies(q.matrix, states)
        index = int(np.argmin(energies))
        if energies[index] < best_energy:
            best_bits, best_energy = states[index].copy(), float(energies[index])
    return best_bits, best_energy


@njit(nogil=True)
def _anneal_reads(linear, coupling, betas, seeds, final_quench):
    n_reads = seeds.shape[0]
    n = linear.shape[0]
    states = np.zeros((n_reads, n), dtype=np.int8)
    for read in range(n_reads):
        np.random.seed(seeds[read])
        state = np.zeros(n, dtype=np.int8)
        for i in range(n):
            if np.random.random() < 0.5:
                state[i] = 1
        # field[i] is the energy change of switching a_i on
        field = linear.copy()
        for i in range(n):
            if state[i] == 1:
                for j in range(n):
                    field[j] += coupling[j, i]

        for beta in betas:
            for i in range(n):
                delta = field[i] if state[i] == 0 else -field[i]
                if delta <= 0.0 or np.random.random() < np.exp(-beta * delta):
                    step = 1.0 if state[i] == 0 else -1.0
                    state[i] = 1 - state[i]
                    for j in range(n):
                        field[j] += coupling[j, i] * step

        if final_quench:
            improved = True
            while improved:
                improved = False
                for i in range(n):
                    delta = field[i] if state[i] == 0 else -field[i]
                    if delta < 0.0:
                        step = 1.0 if state[i] == 0 else -1.0
                        state[i] = 1 - state[i]
                        for j in range(n):
                            field[j] += coupling[j, i] * step
                        improved = True
        states[read] = state
    return states


def simulated_annealing_sample(q: QuboProblem, cfg: Optional[AnnealConfig] = None) -> List[AnnealSample]:
    """
    `num_reads` independent single-flip Metropolis runs over a geometric beta schedule,
    returned as (bits, energy) sorted by ascending energy.
    """
    cfg = cfg or AnnealConfig()
    linear = np.ascontiguousarray(np.diag(q.matrix))
    upper = np.triu(q.matrix, k=1)
    coupling = np.ascontiguousarray(upper + upper.T)
    betas = np.geomspace(cfg.beta_min, cfg.beta_max, cfg.sweeps_per_read)
    seeds = np.random.SeedSequence(cfg.seed).generate_state(cfg.num_reads).astype(np.int64)

    states = _anneal_reads(linear, coupling, betas, seeds, cfg.final_quench)
    energies = _energies(q.matrix, states)
    order = np.argsort(energies, kind="stable")
    return [(states[index], float(energies[index])) for index in order]


def decode_alphas(bits, enc: BinaryEncoding, n_samples: int) -> np.ndarray:
    bits = np.asarray(bits)
    if bits.shape != (enc.bits_per_alpha * n_samples,):
        raise DimensionMismatchException(
            f"Bitstring has length {bits.size}, expected {enc.bits_per_alpha * n_samples} "
            f"({n_samples} samples x {enc.bits_per_alpha} bits)"
        )
    powers = float(enc.base) ** np.arange(enc.bits_per_alpha)
    return bits.reshape(n_samples, enc.bits_per_alpha).astype(np.float64) @ powers


def decode_sample(
    bits,
    samples: Sequence[LabeledSample],
    enc: BinaryEncoding,
    kernel: KernelSpec,
    gram: Optional[np.ndarray] = None,
) -> WeakLearner:
    X, y = samples_to_arrays(samples)
    alphas = decode_alphas(bits, enc, len(y))
    gram = gram_matrix(X, kernel) if gram is None else gram
    return WeakLearner(
        support_x=X,
        support_y=y,
        alphas=alphas,
        bias=bias_from_alphas(gram, y, alphas, enc.alpha_max),
        kernel=kernel,
    )


def train_weak_learner_annealed(
    samples: Sequence[LabeledSample],
    kernel: KernelSpec,
    enc: Optional[BinaryEncoding] = None,
    cfg: Optional[AnnealConfig] = None,
) -> WeakLearner:
    """Average the decoded alphas of the `top_samples` lowest-energy reads"""
    enc = enc or BinaryEncoding()
    cfg = cfg or AnnealConfig()
    X, y = samples_to_arrays(samples)
    check_both_classes(y, context="QUBO training subset")
    gram = gram_matrix(X, kernel)
    q = build_qubo_from_gram(gram, y, enc)

    reads = simulated_annealing_sample(q, cfg)
    retained = reads[: cfg.top_samples]
    alphas = np.mean([decode_alphas(bits, enc, len(y)) for bits, _ in retained], axis=0)
    logger.debug(
        "Annealed %d reads over %d variables; retained energies %.4f..%.4f",
        cfg.num_reads, q.n_vars, retained[0][1], retained[-1][1],
    )
    return WeakLearner(
        support_x=X,
        support_y=y,
        alphas=alphas,
        bias=bias_from_alphas(gram, y, alphas, enc.alpha_max),
        kernel=kernel,
    )


# Sparse text export

def export_qubo(q: QuboProblem, path: Union[str, Path]) -> None:
    """`n_vars N` header, then one `i j coeff` line per non-zero coefficient"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"n_vars {q.n_vars}"]
    lines += [f"{i} {j} {coeff!r}" for (i, j), coeff in sorted(q.coefficients.items())]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_qubo(path: Union[str, Path]) -> QuboProblem:
    lines = [line.split() for line in Path(path).read_text(encoding="utf-8").splitlines() if line.strip()]
    if not lines or len(lines[0]) != 2 or lines[0][0] != "n_vars":
        raise ValidationException(f"QUBO file '{path}' must start with an 'n_vars N' line")
    coefficients = {}
    for number, fields in enumerate(lines[1:], start=2):
        if len(fields) != 3:
            raise ValidationException(f"QUBO file '{path}' line {number}: expected 'i j coeff'")
        coefficients[(int(fields[0]), int(fields[1]))] = float(fields[2])
    return QuboProblem.from_coefficients(int(lines[0][1]), coefficients)
