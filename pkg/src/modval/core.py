"""
Dense complex linear algebra on finite tensor-product Hilbert spaces.

Ordering convention: subsystem 0 is the most significant digit, i.e. the
basis index of ``(b_0, ..., b_{N-1})`` is ``sum_i b_i * prod_{j>i} dims[j]``.
This is the ordering ``numpy.kron`` produces, so ``tensor`` and
``embed_local`` are thin wrappers around it.

All values are immutable after construction (the underlying arrays are
flagged read-only).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Sequence

import numpy as np

HERMITIAN_RTOL = 1e-10


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class HilbertDims:
    dims: tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims:
            raise ValueError("HilbertDims needs at least one subsystem")
        if any(d < 2 for d in dims):
            raise ValueError(f"every subsystem dimension must be >= 2, got {dims}")
        object.__setattr__(self, "dims", dims)

    @property
    def total(self) -> int:
        return int(np.prod(self.dims))

    def __len__(self):
        return len(self.dims)

    def __add__(self, other: "HilbertDims") -> "HilbertDims":
        return HilbertDims(self.dims + other.dims)


def _as_dims(space) -> HilbertDims:
    if isinstance(space, HilbertDims):
        return space
    if isinstance(space, int):
        return HilbertDims((space,))
    return HilbertDims(tuple(space))


@dataclass(frozen=True, eq=False)
class StateVector:
    """Ket on ``space``.

    Normalization is not enforced and the zero vector is representable (it is
    a legal result of ``apply``); routines that need a unit vector call
    ``normalized()``.
    """

    space: HilbertDims
    amps: np.ndarray

    def __post_init__(self):
        space = _as_dims(self.space)
        amps = _frozen(np.ravel(self.amps))
        if amps.shape != (space.total,):
            raise ValueError(f"expected {space.total} amplitudes for dims {space.dims}, got {amps.size}")
        if not np.all(np.isfinite(amps)):
            raise ValueError("amplitudes must be finite")
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "amps", amps)

    @classmethod
    def from_amplitudes(cls, amps, dims=None) -> "StateVector":
        amps = np.ravel(np.asarray(amps, dtype=complex))
        if dims is None:
            dims = (amps.size,)
        return cls(_as_dims(dims), amps)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def normalized(self) -> "StateVector":
        if self.norm == 0:
            raise ValueError("cannot normalize the zero vector")
        return StateVector(self.space, self.amps / self.norm)


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    space: HilbertDims
    entries: np.ndarray

    def __post_init__(self):
        space = _as_dims(self.space)
        m = _frozen(self.entries)
        n = space.total
        if m.shape != (n, n):
            raise ValueError(f"operator must be {n}x{n} for dims {space.dims}, got shape {m.shape}")
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "entries", m)

    @classmethod
    def from_matrix(cls, m, dims=None) -> "OperatorMatrix":
        m = np.asarray(m, dtype=complex)
        if dims is None:
            dims = (m.shape[0],)
        return cls(_as_dims(dims), m)

    def is_hermitian(self) -> bool:
        m = self.entries
        scale = np.max(np.abs(m))
        if scale == 0:
            return True
        return bool(np.max(np.abs(m - m.conj().T)) <= HERMITIAN_RTOL * scale)

    def __matmul__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        _check_same(self.space, other.space)
        return OperatorMatrix(self.space, self.entries @ other.entries)

    def __add__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        _check_same(self.space, other.space)
        return OperatorMatrix(self.space, self.entries + other.entries)

    def __sub__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        _check_same(self.space, other.space)
        return OperatorMatrix(self.space, self.entries - other.entries)

    def __mul__(self, scalar) -> "OperatorMatrix":
        return OperatorMatrix(self.space, complex(scalar) * self.entries)

    __rmul__ = __mul__


@dataclass(frozen=True)
class LocalObservable:
    """Operator ``op`` (single-subsystem matrix) acting on subsystem ``site``."""

    site: int
    op: OperatorMatrix

    def __post_init__(self):
        op = self.op
        if not isinstance(op, OperatorMatrix):
            op = OperatorMatrix.from_matrix(op)
        if len(op.space) != 1:
            raise ValueError("a local observable must act on a single subsystem")
        if int(self.site) < 0:
            raise ValueError(f"site must be nonnegative, got {self.site}")
        object.__setattr__(self, "site", int(self.site))
        object.__setattr__(self, "op", op)


def _check_same(a: HilbertDims, b: HilbertDims):
    if a.dims != b.dims:
        raise ValueError(f"dimension mismatch: {a.dims} vs {b.dims}")


# -- constructors -----------------------------------------------------------

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def pauli(name: str) -> OperatorMatrix:
    mats = {"x": PAULI_X, "y": PAULI_Y, "z": PAULI_Z}
    try:
        return OperatorMatrix.from_matrix(mats[name.lower()])
    except KeyError:
        raise ValueError(f"unknown Pauli component {name!r}") from None


def projector(index: int, dim: int = 2) -> OperatorMatrix:
    """``|index><index|`` on a ``dim``-level system."""
    if not 0 <= index < dim:
        raise ValueError(f"projector index {index} out of range for dimension {dim}")
    m = np.zeros((dim, dim), dtype=complex)
    m[index, index] = 1
    return OperatorMatrix.from_matrix(m)


def identity(space) -> OperatorMatrix:
    space = _as_dims(space)
    return OperatorMatrix(space, np.eye(space.total))


def basis_state(space, *digits: int) -> StateVector:
    """Computational basis state ``|digits>`` (one digit per subsystem)."""
    space = _as_dims(space)
    if len(digits) != len(space):
        raise ValueError(f"need {len(space)} digits, got {len(digits)}")
    idx = 0
    for d, b in zip(space.dims, digits):
        if not 0 <= b < d:
            raise ValueError(f"digit {b} out of range for dimension {d}")
        idx = idx * d + b
    amps = np.zeros(space.total, dtype=complex)
    amps[idx] = 1
    return StateVector(space, amps)


# -- operations -------------------------------------------------------------

def tensor(states: Sequence[StateVector]) -> StateVector:
    if not states:
        raise ValueError("tensor needs at least one state")
    amps = reduce(np.kron, (s.amps for s in states))
    dims = reduce(lambda a, b: a + b, (s.space for s in states))
    return StateVector(dims, amps)


def tensor_ops(ops: Sequence[OperatorMatrix]) -> OperatorMatrix:
    if not ops:
        raise ValueError("tensor_ops needs at least one operator")
    m = reduce(np.kron, (o.entries for o in ops))
    dims = reduce(lambda a, b: a + b, (o.space for o in ops))
    return OperatorMatrix(dims, m)


def embed_local(obs: LocalObservable, space) -> OperatorMatrix:
    """Lift ``obs`` to ``space``: identity everywhere except at ``obs.site``."""
    space = _as_dims(space)
    if obs.site >= len(space):
        raise ValueError(f"site {obs.site} out of range for {len(space)} subsystems")
    if obs.op.space.total != space.dims[obs.site]:
        raise ValueError(f"operator dimension {obs.op.space.total} does not match "
                         f"dims[{obs.site}] = {space.dims[obs.site]}")
    left = int(np.prod(space.dims[:obs.site], dtype=int))
    right = int(np.prod(space.dims[obs.site + 1:], dtype=int))
    m = np.kron(np.kron(np.eye(left), obs.op.entries), np.eye(right))
    return OperatorMatrix(space, m)


def as_operator(op, space) -> OperatorMatrix:
    """Accept a global operator, a local observable or a raw matrix."""
    space = _as_dims(space)
    if isinstance(op, LocalObservable):
        return embed_local(op, space)
    if not isinstance(op, OperatorMatrix):
        op = OperatorMatrix(space, np.asarray(op, dtype=complex))
    _check_same(op.space, space)
    return op


def inner(bra: StateVector, ket: StateVector) -> complex:
    """``<bra|ket>``, conjugate-linear in ``bra``."""
    _check_same(bra.space, ket.space)
    return complex(np.vdot(bra.amps, ket.amps))


def apply(op: OperatorMatrix, state: StateVector) -> StateVector:
    _check_same(op.space, state.space)
    return StateVector(state.space, op.entries @ state.amps)


def herm_exp(op: OperatorMatrix, k: float) -> OperatorMatrix:
    """Unitary ``exp(-i k op)`` for Hermitian ``op``, via eigendecomposition."""
    if not op.is_hermitian():
        raise ValueError("herm_exp requires a Hermitian operator")
    m = op.entries
    evals, evecs = np.linalg.eigh((m + m.conj().T) / 2)
    u = (evecs * np.exp(-1j * float(k) * evals)) @ evecs.conj().T
    return OperatorMatrix(op.space, u)


def spectral_radius(op: OperatorMatrix) -> float:
    m = op.entries
    return float(np.max(np.abs(np.linalg.eigvalsh((m + m.conj().T) / 2))))


def fidelity(a: StateVector | np.ndarray, b: StateVector | np.ndarray) -> float:
    """Pure-state fidelity ``|<a|b>|^2 / (<a|a><b|b>)``."""
    va = a.amps if isinstance(a, StateVector) else np.asarray(a, dtype=complex)
    vb = b.amps if isinstance(b, StateVector) else np.asarray(b, dtype=complex)
    return float(abs(np.vdot(va, vb)) ** 2 / (np.vdot(va, va).real * np.vdot(vb, vb).real))


def random_state(rng: np.random.Generator, space) -> StateVector:
    """Haar-random normalized state (complex Gaussian amplitudes)."""
    space = _as_dims(space)
    v = rng.normal(size=space.total) + 1j * rng.normal(size=space.total)
    return StateVector(space, v / np.linalg.norm(v))


def random_hermitian(rng: np.random.Generator, dim: int) -> np.ndarray:
    m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return (m + m.conj().T) / 2
