"""
Qubit, multi-qubit and spin-1/2 meters coupled to a pre- and post-selected
system.

Every ``evolve_*`` function has two routes: the effective closed form written
in terms of modular values, and ``brute_force_evolve``, which builds the full
system-meter unitary, post-selects and reads off the meter. The latter is the
oracle the former are tested against.

Joint ordering is ``system (x) meter``. The meter coupling defaults to
``P = |1><1|`` on the chosen meter qubit; the spin meter uses ``sigma_z`` with
``|up>`` as index 0.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import (PAULI_Z, HilbertDims, LocalObservable, OperatorMatrix, StateVector, as_operator,
                   basis_state, herm_exp, tensor)
from .errors import OrthogonalSelection, PostSelectionImpossible
from .twostate import (ORTHOGONALITY_THRESHOLD, TwoStateVector, modular_value, overlap,
                       weak_value)

METER_PROJECTOR = np.array([[0, 0], [0, 1]], dtype=complex)


def _normalize_pair(a, b):
    n = math.sqrt(abs(a) ** 2 + abs(b) ** 2)
    if n == 0:
        raise ValueError("meter amplitudes are both zero")
    return complex(a) / n, complex(b) / n


@dataclass(frozen=True)
class QubitMeterState:
    """``a0|0> + a1|1>``, normalized on construction."""

    a0: complex
    a1: complex
    provenance: str = "exact"
    degenerate: bool = False

    def __post_init__(self):
        a0, a1 = _normalize_pair(self.a0, self.a1)
        object.__setattr__(self, "a0", a0)
        object.__setattr__(self, "a1", a1)

    def as_state(self) -> StateVector:
        return StateVector(HilbertDims((2,)), [self.a0, self.a1])

    @classmethod
    def from_state(cls, state: StateVector, provenance="exact", degenerate=False):
        return cls(state.amps[0], state.amps[1], provenance, degenerate)


@dataclass(frozen=True)
class MultiQubitMeterSpec:
    """Initial meter ``a0 |0...0> + a1 |omega>`` over ``n`` qubits.

    ``|omega>`` has ``|1>`` on the qubits listed in ``omega`` and ``|0>``
    elsewhere.
    """

    n: int
    a0: complex
    a1: complex
    omega: frozenset = field(default=None)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("need at least one meter qubit")
        omega = frozenset(range(self.n)) if self.omega is None else frozenset(int(i) for i in self.omega)
        if not omega <= set(range(self.n)):
            raise ValueError(f"omega {sorted(omega)} not a subset of 0..{self.n - 1}")
        a0, a1 = _normalize_pair(self.a0, self.a1)
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "a0", a0)
        object.__setattr__(self, "a1", a1)

    @property
    def omega_digits(self) -> tuple[int, ...]:
        return tuple(1 if i in self.omega else 0 for i in range(self.n))

    def initial_state(self) -> StateVector:
        space = HilbertDims((2,) * self.n)
        zero = basis_state(space, *([0] * self.n)).amps
        branch = basis_state(space, *self.omega_digits).amps
        if not self.omega:
            return StateVector(space, zero)
        return StateVector(space, self.a0 * zero + self.a1 * branch)


@dataclass(frozen=True)
class SpinMeterState:
    """Spin-1/2 meter ``a_up|up> + a_down|down>``.

    Bloch angles follow ``cos(theta/2)|up> + exp(i phi) sin(theta/2)|down>``.
    """

    a_up: complex
    a_down: complex
    provenance: str = "exact"

    def __post_init__(self):
        a_up, a_down = _normalize_pair(self.a_up, self.a_down)
        object.__setattr__(self, "a_up", a_up)
        object.__setattr__(self, "a_down", a_down)

    @classmethod
    def from_angles(cls, theta: float, phi: float) -> "SpinMeterState":
        return cls(math.cos(theta / 2), cmath.exp(1j * phi) * math.sin(theta / 2))

    @property
    def theta(self) -> float:
        return 2 * math.atan2(abs(self.a_down), abs(self.a_up))

    @property
    def phi(self) -> float:
        if abs(self.a_up) == 0 or abs(self.a_down) == 0:
            return 0.0
        d = cmath.phase(self.a_down) - cmath.phase(self.a_up)
        return (d + math.pi) % (2 * math.pi) - math.pi

    def as_state(self) -> StateVector:
        return StateVector(HilbertDims((2,)), [self.a_up, self.a_down])


@dataclass(frozen=True)
class MeterState:
    """Meter state returned by the multi-qubit routes and the oracle."""

    state: StateVector
    provenance: str = "exact"
    degenerate: bool = False


@dataclass(frozen=True)
class CouplingTerm:
    """``k * meter_op[meter_index] (x) observable``.

    ``observable`` is a ``LocalObservable`` or a global ``OperatorMatrix`` on
    the system. ``meter_op`` defaults to ``|1><1|``.
    """

    meter_index: int
    observable: object
    k: float
    meter_op: np.ndarray | None = None

    def __post_init__(self):
        if not math.isfinite(self.k) or self.k < 0:
            raise ValueError(f"coupling strength must be finite and >= 0, got {self.k}")


@dataclass(frozen=True)
class CouplingSpec:
    terms: tuple[CouplingTerm, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))


def coupling_hamiltonian(space: HilbertDims, coupling: CouplingSpec, meter_space: HilbertDims) -> np.ndarray:
    """Integrated interaction ``sum_i k_i C_i (x) M_i`` on ``system (x) meter``."""
    nm = len(meter_space)
    total = np.zeros((space.total * meter_space.total,) * 2, dtype=complex)
    for term in coupling.terms:
        if not 0 <= term.meter_index < nm:
            raise ValueError(f"meter index {term.meter_index} out of range for {nm} meter subsystems")
        c = as_operator(term.observable, space).entries
        if not np.allclose(c, c.conj().T, atol=1e-10 * max(1.0, np.max(np.abs(c)))):
            raise ValueError("coupled observables must be Hermitian")
        m_op = METER_PROJECTOR if term.meter_op is None else np.asarray(term.meter_op, dtype=complex)
        d = meter_space.dims[term.meter_index]
        if m_op.shape != (d, d):
            raise ValueError("meter operator dimension mismatch")
        left = int(np.prod(meter_space.dims[:term.meter_index], dtype=int))
        right = int(np.prod(meter_space.dims[term.meter_index + 1:], dtype=int))
        m_full = np.kron(np.kron(np.eye(left), m_op), np.eye(right))
        total += term.k * np.kron(c, m_full)
    return total


def joint_evolution(tsv: TwoStateVector, coupling: CouplingSpec, meter_init: StateVector) -> np.ndarray:
    """Joint state ``exp(-iH)(|psi> (x) |meter>)`` as a ``(system, meter)`` array."""
    space = tsv.space
    meter_space = meter_init.space
    joint = tensor([tsv.pre.normalized(), meter_init.normalized()])
    if not coupling.terms:
        out = joint.amps
    else:
        h = OperatorMatrix(joint.space, coupling_hamiltonian(space, coupling, meter_space))
        out = herm_exp(h, 1.0).entries @ joint.amps
    return out.reshape(space.total, meter_space.total)


def brute_force_evolve(tsv: TwoStateVector, coupling: CouplingSpec, meter_init: StateVector) -> MeterState:
    """Exact post-selected meter state. No approximation anywhere."""
    psi_joint = joint_evolution(tsv, coupling, meter_init)
    phi = tsv.post.normalized().amps
    meter = phi.conj() @ psi_joint
    norm = np.linalg.norm(meter)
    if norm < 1e-14:
        raise PostSelectionImpossible("post-selected meter amplitude is identically zero")
    return MeterState(StateVector(meter_init.space, meter / norm), "exact")


def system_disturbance(tsv: TwoStateVector, coupling: CouplingSpec, meter_init: StateVector) -> float:
    """``1 - <psi|rho_sys|psi>`` after the interaction, before post-selection."""
    psi_joint = joint_evolution(tsv, coupling, meter_init)
    psi = tsv.pre.normalized().amps
    branch = psi.conj() @ psi_joint
    return float(1 - np.vdot(branch, branch).real)


def _qubit_degenerate(tsv, C, k, a1):
    # post-selection orthogonal: only the coupled branch survives
    try:
        modular_value(tsv, C, k)
    except OrthogonalSelection as exc:
        if exc.numerator is None or abs(exc.numerator) < ORTHOGONALITY_THRESHOLD or a1 == 0:
            raise PostSelectionImpossible("both meter branches vanish after post-selection") from exc
        return True
    return False


def evolve_qubit_meter(tsv: TwoStateVector, C, k: float, meter: QubitMeterState) -> QubitMeterState:
    """Post-selected qubit meter ``N(a0|0> + a1 C_m |1>)`` under ``k P (x) C``.

    An orthogonal post-selection yields ``|1>`` with ``degenerate=True``.
    """
    if abs(overlap(tsv)) < ORTHOGONALITY_THRESHOLD:
        _qubit_degenerate(tsv, C, k, meter.a1)
        return QubitMeterState(0, 1, "effective", degenerate=True)
    cm = modular_value(tsv, C, k).value
    return QubitMeterState(meter.a0, meter.a1 * cm, "effective")


def naive_qubit_meter(tsv: TwoStateVector, C, k: float, meter: QubitMeterState) -> QubitMeterState:
    """``N(a0|0> + a1 exp(-ik C_w)|1>)``: the weak-value substitution, valid only for small k."""
    cw = weak_value(tsv, C).value
    return QubitMeterState(meter.a0, meter.a1 * cmath.exp(-1j * k * cw), "effective")


def evolve_multi_qubit_meter(tsv: TwoStateVector, locals_: Sequence[LocalObservable], k: float,
                             spec: MultiQubitMeterSpec) -> MeterState:
    """Meter qubit ``i`` is coupled to ``locals_[i]``; only qubits in omega contribute."""
    if len(locals_) != spec.n:
        raise ValueError(f"{len(locals_)} observables for {spec.n} meter qubits")
    sites = [obs.site for obs in locals_]
    if len(set(sites)) != len(sites):
        raise ValueError(f"observable sites must be distinct, got {sites}")
    meter_space = HilbertDims((2,) * spec.n)
    zero = basis_state(meter_space, *([0] * spec.n)).amps
    if not spec.omega:
        return MeterState(StateVector(meter_space, zero), "effective")
    branch = basis_state(meter_space, *spec.omega_digits).amps
    generator = sum(as_operator(locals_[i], tsv.space).entries for i in sorted(spec.omega))
    generator = OperatorMatrix(tsv.space, generator)
    if abs(overlap(tsv)) < ORTHOGONALITY_THRESHOLD:
        _qubit_degenerate(tsv, generator, k, spec.a1)
        return MeterState(StateVector(meter_space, branch), "effective", degenerate=True)
    cm = modular_value(tsv, generator, k).value
    amps = spec.a0 * zero + spec.a1 * cm * branch
    return MeterState(StateVector(meter_space, amps / np.linalg.norm(amps)), "effective")


def multi_qubit_coupling(locals_: Sequence[LocalObservable], k: float) -> CouplingSpec:
    return CouplingSpec(tuple(CouplingTerm(i, obs, k) for i, obs in enumerate(locals_)))


def evolve_spin_meter(tsv: TwoStateVector, C, k: float, spin: SpinMeterState) -> SpinMeterState:
    """Post-selected spin under ``k sigma_z (x) C``.

    ``|up>`` picks up ``exp(-ikC)`` and ``|down>`` picks up ``exp(+ikC)``, so
    the state is ``N(a_up C_m(k)|up> + a_down C_m(-k)|down>)``.
    """
    m_plus = modular_value(tsv, C, k).value
    m_minus = modular_value(tsv, C, -k).value
    return SpinMeterState(spin.a_up * m_plus, spin.a_down * m_minus, "effective")


def naive_spin_meter(tsv: TwoStateVector, C, k: float, spin: SpinMeterState) -> SpinMeterState:
    cw = weak_value(tsv, C).value
    return SpinMeterState(spin.a_up * cmath.exp(-1j * k * cw), spin.a_down * cmath.exp(1j * k * cw),
                          "effective")


def spin_coupling(C, k: float) -> CouplingSpec:
    return CouplingSpec((CouplingTerm(0, C, k, meter_op=PAULI_Z),))


def osaka_initial_state(beta: complex) -> StateVector:
    """``(|00> + beta(|01> + |10> + |11>)) / sqrt(1 + 3|beta|^2)``."""
    beta = complex(beta)
    amps = np.array([1, beta, beta, beta]) / math.sqrt(1 + 3 * abs(beta) ** 2)
    return StateVector(HilbertDims((2, 2)), amps)


def osaka_meter(tsv: TwoStateVector, locals_: Sequence[LocalObservable], k: float,
                beta: complex) -> MeterState:
    """Two meter qubits prepared in a superposition of all coupling branches.

    Meter qubit 0 couples to ``locals_[0]`` and qubit 1 to ``locals_[1]``; the
    ``|01>``, ``|10>`` and ``|11>`` branches pick up the modular values of the
    second observable, the first, and their sum.
    """
    if len(locals_) != 2:
        raise ValueError("the superposition meter needs exactly two local observables")
    a, b = locals_
    if a.site == b.site:
        raise ValueError("observables must sit at distinct sites")
    beta = complex(beta)
    space = tsv.space
    ca, cb = as_operator(a, space), as_operator(b, space)
    m_b = modular_value(tsv, cb, k).value
    m_a = modular_value(tsv, ca, k).value
    m_ab = modular_value(tsv, ca + cb, k).value
    amps = np.array([1, beta * m_b, beta * m_a, beta * m_ab])
    return MeterState(StateVector(HilbertDims((2, 2)), amps / np.linalg.norm(amps)), "effective")
