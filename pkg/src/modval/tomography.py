"""
Finite-ensemble readout of meter states.

Sampling uses numpy's PCG64 generator. Basis ``b`` of a plan with seed ``s``
draws from its own stream ``SeedSequence(s, spawn_key=(b,))`` so that counts
do not depend on evaluation order; bootstrap resampling uses the stream
``spawn_key=(BOOTSTRAP_KEY,)``.

Estimation is linear inversion followed by eigenvalue clipping.
"""
from __future__ import annotations

import csv
import io
import itertools
from dataclasses import dataclass
from functools import reduce
from typing import Sequence

import numpy as np

from .core import StateVector
from .errors import IllConditioned, IncompleteBasis

BOOTSTRAP_KEY = 2 ** 31 - 1
BOOTSTRAP_RESAMPLES = 100
CONDITIONING_FLOOR = 0.05

_SQ2 = 1 / np.sqrt(2)
PAULI_EIGENBASES = {
    "Z": np.array([[1, 0], [0, 1]], dtype=complex),
    "X": np.array([[1, 1], [1, -1]], dtype=complex) * _SQ2,
    "Y": np.array([[1, 1], [1j, -1j]], dtype=complex) * _SQ2,
}


def pauli_bases(n_qubits: int, labels: str = "ZXY") -> list[tuple[str, np.ndarray]]:
    """All ``3**n`` product Pauli eigenbases, columns are basis vectors.

    Outcome ``o`` of a product basis follows the same big-endian ordering as
    the state space (qubit 0 most significant).
    """
    out = []
    for combo in itertools.product(labels, repeat=n_qubits):
        mat = reduce(np.kron, (PAULI_EIGENBASES[c] for c in combo))
        out.append(("".join(combo), mat))
    return out


def pm_basis(n_qubits: int = 2) -> list[tuple[str, np.ndarray]]:
    """The single product basis ``(|0> +- |1>)/sqrt 2`` on every qubit."""
    return [("X" * n_qubits, reduce(np.kron, [PAULI_EIGENBASES["X"]] * n_qubits))]


@dataclass(frozen=True, eq=False)
class MeasurementPlan:
    bases: tuple[np.ndarray, ...]
    shots_per_basis: int
    seed: int
    labels: tuple[str, ...] = ()

    def __post_init__(self):
        bases = []
        for b in self.bases:
            b = np.array(b, dtype=complex)
            if b.ndim != 2 or b.shape[0] != b.shape[1]:
                raise ValueError("each basis must be a square matrix of column vectors")
            if np.max(np.abs(b.conj().T @ b - np.eye(b.shape[0]))) > 1e-12:
                raise ValueError("measurement basis is not orthonormal")
            b.setflags(write=False)
            bases.append(b)
        if not bases:
            raise ValueError("plan needs at least one basis")
        if len({b.shape for b in bases}) != 1:
            raise ValueError("all bases must share one dimension")
        if int(self.shots_per_basis) < 1:
            raise ValueError("shots_per_basis must be >= 1")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        labels = tuple(self.labels) or tuple(str(i) for i in range(len(bases)))
        object.__setattr__(self, "bases", tuple(bases))
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "shots_per_basis", int(self.shots_per_basis))
        object.__setattr__(self, "seed", int(self.seed))

    @classmethod
    def pauli(cls, n_qubits: int, shots_per_basis: int, seed: int) -> "MeasurementPlan":
        labels, mats = zip(*pauli_bases(n_qubits))
        return cls(mats, shots_per_basis, seed, labels)

    @classmethod
    def pm(cls, shots_per_basis: int, seed: int, n_qubits: int = 2) -> "MeasurementPlan":
        labels, mats = zip(*pm_basis(n_qubits))
        return cls(mats, shots_per_basis, seed, labels)

    @property
    def dim(self) -> int:
        return self.bases[0].shape[0]


@dataclass(frozen=True, eq=False)
class CountsRecord:
    plan: MeasurementPlan
    counts: np.ndarray  # (n_bases, dim) integers

    def __post_init__(self):
        counts = np.array(self.counts, dtype=np.int64)
        if counts.shape != (len(self.plan.bases), self.plan.dim):
            raise ValueError("counts shape does not match the plan")
        if np.any(counts < 0) or np.any(counts.sum(axis=1) != self.plan.shots_per_basis):
            raise ValueError("counts per basis must be nonnegative and sum to shots_per_basis")
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)

    @property
    def frequencies(self) -> np.ndarray:
        return self.counts / self.plan.shots_per_basis

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["basis_id", "outcome_id", "count"])
        for b, row in enumerate(self.counts):
            for o, c in enumerate(row):
                w.writerow([self.plan.labels[b], o, int(c)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, plan: MeasurementPlan) -> "CountsRecord":
        counts = np.zeros((len(plan.bases), plan.dim), dtype=np.int64)
        index = {label: i for i, label in enumerate(plan.labels)}
        for row in csv.DictReader(io.StringIO(text)):
            counts[index[row["basis_id"]], int(row["outcome_id"])] = int(row["count"])
        return cls(plan, counts)


def born_probabilities(state: StateVector | np.ndarray, bases: Sequence[np.ndarray]) -> np.ndarray:
    amps = state.amps if isinstance(state, StateVector) else np.asarray(state, dtype=complex)
    amps = amps / np.linalg.norm(amps)
    probs = np.array([np.abs(b.conj().T @ amps) ** 2 for b in bases])
    return probs / probs.sum(axis=1, keepdims=True)


def _basis_rng(seed: int, key: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(key,))))


def sample_counts(state: StateVector, plan: MeasurementPlan) -> CountsRecord:
    """Multinomial counts per basis; deterministic given ``plan.seed``."""
    if abs(state.norm - 1) > 1e-10:
        raise ValueError("sample_counts needs a normalized state")
    if state.space.total != plan.dim:
        raise ValueError("state dimension does not match the measurement plan")
    probs = born_probabilities(state, plan.bases)
    counts = np.stack([
        _basis_rng(plan.seed, b).multinomial(plan.shots_per_basis, probs[b])
        for b in range(len(plan.bases))
    ])
    return CountsRecord(plan, counts)


@dataclass(frozen=True, eq=False)
class DensityEstimate:
    """Reconstructed density matrix; ``counts`` is kept for bootstrapping."""

    rho: np.ndarray
    counts: CountsRecord | None = None
    raw_min_eigenvalue: float = 0.0

    def dominant_vector(self) -> np.ndarray:
        evals, evecs = np.linalg.eigh(self.rho)
        return evecs[:, -1]

    def purity(self) -> float:
        return float(np.real(np.trace(self.rho @ self.rho)))


def _design_matrix(bases: Sequence[np.ndarray]) -> np.ndarray:
    # row (b, o): Tr(|v><v| rho) = conj(v) . rho . v = sum_ij conj(v_i) v_j rho_ij
    rows = []
    for b in bases:
        for o in range(b.shape[1]):
            v = b[:, o]
            rows.append(np.outer(v.conj(), v).ravel())
    return np.array(rows)


def _physical(rho: np.ndarray) -> tuple[np.ndarray, float]:
    rho = (rho + rho.conj().T) / 2
    evals, evecs = np.linalg.eigh(rho)
    raw_min = float(evals[0])
    evals = np.clip(evals, 0, None)
    if evals.sum() <= 0:
        raise IllConditioned("reconstructed state has no positive weight")
    evals = evals / evals.sum()
    return (evecs * evals) @ evecs.conj().T, raw_min


def invert_probabilities(bases: Sequence[np.ndarray], probabilities: np.ndarray) -> np.ndarray:
    """Least-squares density matrix from Born probabilities, before clipping."""
    dim = bases[0].shape[0]
    design = _design_matrix(bases)
    if np.linalg.matrix_rank(design) < dim * dim:
        raise IncompleteBasis(f"bases span rank {np.linalg.matrix_rank(design)} < {dim * dim}")
    vec, *_ = np.linalg.lstsq(design, np.ravel(probabilities).astype(complex), rcond=None)
    rho = vec.reshape(dim, dim)
    return rho / np.trace(rho)


def linear_inversion(counts: CountsRecord) -> DensityEstimate:
    rho, raw_min = _physical(invert_probabilities(counts.plan.bases, counts.frequencies))
    return DensityEstimate(rho, counts, raw_min)


def linear_inversion_exact(bases: Sequence[np.ndarray], probabilities: np.ndarray) -> DensityEstimate:
    """Infinite-shot reconstruction from exact probabilities."""
    rho, raw_min = _physical(invert_probabilities(bases, probabilities))
    return DensityEstimate(rho, None, raw_min)


@dataclass(frozen=True)
class ModularEstimate:
    value: complex
    stderr: float
    shots_total: int


def _ratio_from_vector(vec: np.ndarray, initial: np.ndarray, index: int) -> complex:
    """``(initial[0] vec[index]) / (initial[index] vec[0])`` with the conditioning check."""
    vec = vec / np.linalg.norm(vec)
    if abs(vec[0]) < CONDITIONING_FLOOR:
        raise IllConditioned(f"|gamma| = {abs(vec[0]):.3g} below the floor {CONDITIONING_FLOOR}")
    return complex(initial[0] * vec[index] / (initial[index] * vec[0]))


def _bootstrap(counts: CountsRecord, statistic, n_boot: int = BOOTSTRAP_RESAMPLES) -> np.ndarray:
    rng = _basis_rng(counts.plan.seed, BOOTSTRAP_KEY)
    freqs = counts.frequencies
    shots = counts.plan.shots_per_basis
    out = []
    for _ in range(n_boot):
        resampled = np.stack([rng.multinomial(shots, f / f.sum()) for f in freqs])
        est = linear_inversion(CountsRecord(counts.plan, resampled))
        out.append(statistic(est))
    return np.array(out)


def _complex_std(samples: np.ndarray) -> np.ndarray:
    return np.sqrt(np.var(samples.real, axis=0) + np.var(samples.imag, axis=0))


def extract_modular(estimate: DensityEstimate, alpha: complex, beta: complex,
                    n_boot: int = BOOTSTRAP_RESAMPLES) -> ModularEstimate:
    """``C_m = alpha delta / (beta gamma)`` from the dominant eigenvector ``gamma|0> + delta|1>``."""
    if estimate.rho.shape != (2, 2):
        raise ValueError("extract_modular needs a single-qubit estimate")
    if beta == 0:
        raise IllConditioned("beta = 0: the meter carries no modular-value branch")
    initial = np.array([alpha, beta], dtype=complex)
    value = _ratio_from_vector(estimate.dominant_vector(), initial, 1)
    stderr, shots = 0.0, 0
    if estimate.counts is not None:
        shots = int(estimate.counts.counts.sum())
    if estimate.counts is not None and n_boot > 0:
        boot = _bootstrap(estimate.counts,
                          lambda e: _ratio_from_vector(e.dominant_vector(), initial, 1), n_boot)
        stderr = float(_complex_std(boot))
    return ModularEstimate(value, stderr, shots)


def extract_modular_multi(estimate: DensityEstimate, initial: np.ndarray,
                          n_boot: int = BOOTSTRAP_RESAMPLES) -> dict[int, ModularEstimate]:
    """Modular value carried by every nonzero branch ``j`` of a multi-qubit meter.

    For an initial meter ``sum_j a_j |j>`` whose branch ``j`` picks up the
    factor ``m_j`` (with ``m_0 = 1``), returns ``{j: m_j}`` computed as
    ``a_0 v_j / (a_j v_0)`` from the dominant eigenvector ``v``.
    """
    initial = np.asarray(initial, dtype=complex)
    branches = [j for j in range(1, initial.size) if abs(initial[j]) > 0]

    def stat(e):
        vec = e.dominant_vector()
        return np.array([_ratio_from_vector(vec, initial, j) for j in branches])

    values = stat(estimate)
    stderrs = np.zeros(len(branches))
    shots = 0
    if estimate.counts is not None:
        shots = int(estimate.counts.counts.sum())
    if estimate.counts is not None and n_boot > 0:
        stderrs = _complex_std(_bootstrap(estimate.counts, stat, n_boot))
    return {j: ModularEstimate(complex(v), float(s), shots) for j, v, s in zip(branches, values, stderrs)}


# -- single-basis partial tomography -----------------------------------------

@dataclass(frozen=True)
class PMProbabilities:
    """Outcome probabilities in the ``+-`` product basis, ordered ``++, +-, -+, --``."""

    probs: np.ndarray
    shots: int = 0

    def correlations(self) -> tuple[float, float, float]:
        """``<s1>``, ``<s2>``, ``<s1 s2>`` with ``s = +1`` for ``+`` and ``-1`` for ``-``."""
        s1 = np.array([1, 1, -1, -1])
        s2 = np.array([1, -1, 1, -1])
        p = self.probs
        return float(s1 @ p), float(s2 @ p), float((s1 * s2) @ p)


def partial_tomography_pm(meter_state: StateVector, plan: MeasurementPlan | None = None) -> PMProbabilities:
    """Estimate the four ``+-`` outcome probabilities of a two-qubit meter.

    Without a plan the exact (infinite-shot) probabilities are returned.
    """
    if meter_state.space.dims != (2, 2):
        raise ValueError("partial tomography needs a two-qubit meter")
    if plan is None:
        _, basis = pm_basis(2)[0]
        return PMProbabilities(born_probabilities(meter_state, [basis])[0])
    if len(plan.bases) != 1:
        raise ValueError("partial tomography uses a single basis")
    counts = sample_counts(meter_state.normalized(), plan)
    return PMProbabilities(counts.frequencies[0], plan.shots_per_basis)


@dataclass(frozen=True)
class PMReconstruction:
    """First-order-in-beta readings from the ``+-`` statistics."""

    re_modular_a: float
    re_modular_b: float
    re_modular_sum: float

    @property
    def re_weak_a(self) -> float:
        return (1 - self.re_modular_a) / 2

    @property
    def re_weak_b(self) -> float:
        return (1 - self.re_modular_b) / 2

    @property
    def re_weak_product(self) -> float:
        return (self.re_modular_sum - self.re_modular_a - self.re_modular_b + 1) / 4


def pm_weak_values(pm: PMProbabilities, beta: float) -> PMReconstruction:
    """Map ``+-`` statistics of the superposition meter to real parts of weak values.

    For the meter ``N(|00> + beta(m_b|01> + m_a|10> + m_ab|11>))`` with real
    ``beta``, to first order ``<s1> = 2 beta Re m_a``, ``<s2> = 2 beta Re m_b``
    and ``<s1 s2> = 2 beta Re m_ab``. The projector identities at ``k = pi``
    then give the weak values. The systematic error is O(beta).
    """
    beta = complex(beta)
    if beta.imag != 0 or beta.real <= 0:
        raise ValueError("the +- reconstruction needs a real positive beta")
    e1, e2, e12 = pm.correlations()
    b = beta.real
    return PMReconstruction(e1 / (2 * b), e2 / (2 * b), e12 / (2 * b))
