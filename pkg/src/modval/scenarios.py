"""
Canned two-state vectors and end-to-end reproductions.

Hardy encoding: particle 1 has ``|A> -> 0``, ``|C> -> 1``; particle 2 has
``|B> -> 0``, ``|D> -> 1``. Spin encoding: ``|up_z> -> 0``,
``|up_x> = (|0> + |1>)/sqrt 2``, ``|up_y> = (|0> + i|1>)/sqrt 2``.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .core import (HilbertDims, LocalObservable, OperatorMatrix, StateVector, as_operator, embed_local,
                   fidelity, pauli, projector)
from .meters import (CouplingSpec, CouplingTerm, MultiQubitMeterSpec, QubitMeterState,
                     SpinMeterState, brute_force_evolve, evolve_multi_qubit_meter,
                     evolve_qubit_meter, evolve_spin_meter, multi_qubit_coupling,
                     osaka_initial_state, osaka_meter, spin_coupling)
from .tomography import (MeasurementPlan, extract_modular_multi, linear_inversion,
                         partial_tomography_pm, pm_weak_values, sample_counts)
from .twostate import (TwoStateVector, ValueEstimate, modular_value, overlap, product_operator,
                       weak_value)

EXACT_TOL = 1e-12
ORACLE_TOL = 1e-10


@dataclass
class Check:
    quantity: str
    target: complex
    tolerance: float
    passed: bool


@dataclass
class ScenarioReport:
    name: str
    parameters: dict = field(default_factory=dict)
    quantities: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)

    def add(self, quantity: str, estimate, target=None, tolerance=None) -> ValueEstimate:
        if not isinstance(estimate, ValueEstimate):
            estimate = ValueEstimate(estimate)
        self.quantities[quantity] = estimate
        if target is not None:
            if tolerance is None:
                raise ValueError(f"target for {quantity!r} needs a tolerance")
            passed = abs(estimate.value - complex(target)) <= tolerance
            self.checks[quantity] = Check(quantity, complex(target), float(tolerance), bool(passed))
        return estimate

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks.values())

    def to_dict(self) -> dict:
        def cx(z):
            return [float(np.real(z)), float(np.imag(z))]

        rows = []
        for name, est in self.quantities.items():
            row = {"quantity": name, "value": cx(est.value), "provenance": est.provenance,
                   "stderr": est.stderr}
            if name in self.checks:
                c = self.checks[name]
                row.update(target=cx(c.target), tolerance=c.tolerance, passed=c.passed)
            rows.append(row)
        return {"scenario": self.name, "parameters": self.parameters, "quantities": rows,
                "passed": self.passed}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["quantity", "value_re", "value_im", "stderr", "target_re", "target_im", "pass"])
        for name, est in self.quantities.items():
            c = self.checks.get(name)
            w.writerow([name, repr(est.value.real), repr(est.value.imag), repr(est.stderr),
                        "" if c is None else repr(c.target.real),
                        "" if c is None else repr(c.target.imag),
                        "" if c is None else str(c.passed).lower()])
        return buf.getvalue()


# -- canned two-state vectors -------------------------------------------------

HARDY_SPACE = HilbertDims((2, 2))


def hardy_tsv() -> TwoStateVector:
    """Two particles at four locations; coefficients entered as printed."""
    a, c = np.array([1, 0]), np.array([0, 1])  # particle 1
    b, d = np.array([1, 0]), np.array([0, 1])  # particle 2
    pre = (np.kron(a, d) + np.kron(c, d) + np.kron(c, b)) / math.sqrt(3)
    post = np.kron(a - c, b - d) / 2
    return TwoStateVector.from_amplitudes(pre, post, HARDY_SPACE)


def hardy_projectors() -> tuple[LocalObservable, LocalObservable]:
    """``P_A`` on particle 1 and ``P_B`` on particle 2."""
    return LocalObservable(0, projector(0)), LocalObservable(1, projector(0))


def spin_hardy_tsv() -> TwoStateVector:
    """Singlet pre-selection, ``<up_y|_1 <up_x|_2`` post-selection."""
    up, down = np.array([1, 0]), np.array([0, 1])
    singlet = (np.kron(up, down) - np.kron(down, up)) / math.sqrt(2)
    up_x = (up + down) / math.sqrt(2)
    up_y = (up + 1j * down) / math.sqrt(2)
    return TwoStateVector.from_amplitudes(singlet, np.kron(up_y, up_x), HARDY_SPACE)


def _is_projector(op: OperatorMatrix) -> bool:
    m = op.entries
    return bool(np.max(np.abs(m @ m - m)) < 1e-12 and np.max(np.abs(m - m.conj().T)) < 1e-12)


# -- scenarios -----------------------------------------------------------------

def _oracle_gap(effective: StateVector, exact: StateVector) -> float:
    return 1 - fidelity(effective, exact)


def hardy_report() -> ScenarioReport:
    tsv = hardy_tsv()
    pa, pb = hardy_projectors()
    rep = ScenarioReport("hardy", {"encoding": "A->0, C->1 (particle 1); B->0, D->1 (particle 2)"})
    rep.add("|overlap|", abs(overlap(tsv)), 1 / (2 * math.sqrt(3)), EXACT_TOL)
    rep.add("(P_A1)_w", weak_value(tsv, pa), 1, EXACT_TOL)
    rep.add("(P_B2)_w", weak_value(tsv, pb), 1, EXACT_TOL)
    rep.add("(P_A1 P_B2)_w", weak_value(tsv, product_operator(tsv.space, [pa, pb])), 0, EXACT_TOL)
    rep.add("(P_C1)_w", weak_value(tsv, LocalObservable(0, projector(1))), 0, EXACT_TOL)
    rep.add("(P_A1)_m k=pi", modular_value(tsv, pa, math.pi), -1, EXACT_TOL)
    rep.add("(P_B2)_m k=pi", modular_value(tsv, pb, math.pi), -1, EXACT_TOL)
    rep.add("(P_A1+P_B2)_m k=pi",
            modular_value(tsv, as_operator(pa, tsv.space) + as_operator(pb, tsv.space), math.pi),
            -3, EXACT_TOL)

    meter = QubitMeterState(1 / math.sqrt(2), 1 / math.sqrt(2))
    eff = evolve_qubit_meter(tsv, pa, math.pi, meter).as_state()
    exact = brute_force_evolve(tsv, CouplingSpec((CouplingTerm(0, pa, math.pi),)), meter.as_state()).state
    rep.add("oracle gap qubit meter", _oracle_gap(eff, exact), 0, ORACLE_TOL)
    spec = MultiQubitMeterSpec(2, 1 / math.sqrt(2), 1 / math.sqrt(2))
    eff = evolve_multi_qubit_meter(tsv, [pa, pb], math.pi, spec).state
    exact = brute_force_evolve(tsv, multi_qubit_coupling([pa, pb], math.pi), spec.initial_state()).state
    rep.add("oracle gap two-qubit meter", _oracle_gap(eff, exact), 0, ORACLE_TOL)
    return rep


def spin_hardy_report() -> ScenarioReport:
    tsv = spin_hardy_tsv()
    sx1, sy2 = LocalObservable(0, pauli("x")), LocalObservable(1, pauli("y"))
    rep = ScenarioReport("spin-hardy", {
        "encoding": "up_z->0; up_x=(|0>+|1>)/sqrt2; up_y=(|0>+i|1>)/sqrt2",
    })
    rep.add("(sx1)_w", weak_value(tsv, sx1), -1, EXACT_TOL)
    rep.add("(sy2)_w", weak_value(tsv, sy2), -1, EXACT_TOL)
    rep.add("(sx1 sy2)_w", weak_value(tsv, product_operator(tsv.space, [sx1, sy2])), -1, EXACT_TOL)
    sx2 = LocalObservable(1, pauli("x"))
    rep.add("(sx1+sx2)_w", weak_value(tsv, as_operator(sx1, tsv.space) + as_operator(sx2, tsv.space)),
            0, EXACT_TOL)
    half = math.pi / 2
    rep.add("(sx1)_m k=pi/2", modular_value(tsv, sx1, half), 1j, EXACT_TOL)
    rep.add("(sy2)_m k=pi/2", modular_value(tsv, sy2, half), 1j, EXACT_TOL)
    total = as_operator(sx1, tsv.space) + as_operator(sy2, tsv.space)
    # (-i)^2 (sx1 sy2)_w
    rep.add("(sx1+sy2)_m k=pi/2", modular_value(tsv, total, half), 1, EXACT_TOL)

    spin = SpinMeterState.from_angles(1.1, 0.4)
    eff = evolve_spin_meter(tsv, sx1, 0.3, spin).as_state()
    exact = brute_force_evolve(tsv, spin_coupling(sx1, 0.3), spin.as_state()).state
    rep.add("oracle gap spin meter", _oracle_gap(eff, exact), 0, ORACLE_TOL)
    spec = MultiQubitMeterSpec(2, 1 / math.sqrt(2), 1 / math.sqrt(2))
    eff = evolve_multi_qubit_meter(tsv, [sx1, sy2], half, spec).state
    exact = brute_force_evolve(tsv, multi_qubit_coupling([sx1, sy2], half), spec.initial_state()).state
    rep.add("oracle gap two-qubit meter", _oracle_gap(eff, exact), 0, ORACLE_TOL)
    return rep


@dataclass(frozen=True)
class ProjectorIdentities:
    weak_a: complex
    weak_b: complex
    weak_ab: complex
    modular_a: complex
    modular_b: complex
    modular_sum: complex

    @property
    def via_modular(self) -> tuple[complex, complex, complex]:
        a = (1 - self.modular_a) / 2
        b = (1 - self.modular_b) / 2
        ab = (self.modular_sum - self.modular_a - self.modular_b + 1) / 4
        return a, b, ab

    @property
    def residuals(self) -> tuple[float, float, float]:
        a, b, ab = self.via_modular
        return abs(a - self.weak_a), abs(b - self.weak_b), abs(ab - self.weak_ab)


def projector_identities(tsv: TwoStateVector, pa: LocalObservable, pb: LocalObservable) -> ProjectorIdentities:
    """Both sides of the ``k = pi`` projector identities."""
    for p in (pa, pb):
        if not _is_projector(p.op):
            raise ValueError("projector identities need idempotent Hermitian operators")
    if pa.site == pb.site:
        raise ValueError("projectors must act on distinct sites")
    space = tsv.space
    ea, eb = embed_local(pa, space), embed_local(pb, space)
    return ProjectorIdentities(
        weak_value(tsv, ea).value, weak_value(tsv, eb).value, weak_value(tsv, ea @ eb).value,
        modular_value(tsv, ea, math.pi).value, modular_value(tsv, eb, math.pi).value,
        modular_value(tsv, ea + eb, math.pi).value,
    )


def projector_identities_check(tsv: TwoStateVector | None = None, pa: LocalObservable | None = None,
                               pb: LocalObservable | None = None) -> ScenarioReport:
    if tsv is None:
        tsv = hardy_tsv()
    if pa is None or pb is None:
        pa, pb = hardy_projectors()
    ident = projector_identities(tsv, pa, pb)
    rep = ScenarioReport("projector-identities", {"k": math.pi})
    for label, exact, via in zip(("P_A", "P_B", "P_A P_B"),
                                 (ident.weak_a, ident.weak_b, ident.weak_ab), ident.via_modular):
        rep.add(f"({label})_w", exact)
        rep.add(f"({label})_w via modular", via)
        rep.add(f"residual ({label})", abs(via - exact), 0, ORACLE_TOL)
    rep.add("(P_A)_m", ident.modular_a)
    rep.add("(P_B)_m", ident.modular_b)
    rep.add("(P_A+P_B)_m", ident.modular_sum)
    return rep


def child_seed(seed: int, key: int) -> int:
    """Deterministic 64-bit seed for sub-experiment ``key``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(key),))
    return int(ss.generate_state(1, np.uint64)[0])


def _tomographic(m) -> ValueEstimate:
    return ValueEstimate(m.value, "tomographic", m.stderr)


def osaka_experiment(beta: complex, shots: int, seed: int,
                     modes: tuple[str, ...] = ("partial", "full", "split")) -> ScenarioReport:
    """Superposition meter on the Hardy two-state vector at ``k = pi``.

    Modes
    -----
    partial
        Single ``+-`` basis on the meter, first-order-in-beta reconstruction of
        the real parts of the weak values (exact probabilities reported too).
        Requires real ``beta``.
    full
        Nine-basis two-qubit tomography of the same meter; all three modular
        values and both parts of the weak values.
    split
        The ensemble split three ways, each member coupled to one meter only
        (qubit meters for ``P_A`` and ``P_B``, a two-qubit meter for the sum),
        each read out by full tomography.

    ``shots`` is per measurement basis.
    """
    beta = complex(beta)
    if not 0 < abs(beta) < 1:
        raise ValueError("|beta| must lie in (0, 1)")
    if shots < 1:
        raise ValueError("shots must be positive")
    tsv = hardy_tsv()
    pa, pb = hardy_projectors()
    k = math.pi
    rep = ScenarioReport("osaka", {"beta": [beta.real, beta.imag], "shots_per_basis": int(shots),
                                   "seed": int(seed), "k": k, "modes": list(modes)})

    exact_a = modular_value(tsv, pa, k).value
    exact_b = modular_value(tsv, pb, k).value
    exact_sum = modular_value(tsv, as_operator(pa, tsv.space) + as_operator(pb, tsv.space), k).value

    initial = osaka_initial_state(beta)
    eff = osaka_meter(tsv, [pa, pb], k, beta).state
    exact = brute_force_evolve(tsv, multi_qubit_coupling([pa, pb], k), initial).state
    rep.add("oracle gap superposition meter", _oracle_gap(eff, exact), 0, ORACLE_TOL)

    if "partial" in modes:
        if beta.imag != 0 or beta.real <= 0:
            raise ValueError("partial (+-) readout needs a real positive beta")
        b = beta.real
        recon = pm_weak_values(partial_tomography_pm(exact), b)
        sys_tol = 5 * b
        rep.add("partial exact Re(P_A1)_w", recon.re_weak_a, 1, sys_tol)
        rep.add("partial exact Re(P_B2)_w", recon.re_weak_b, 1, sys_tol)
        rep.add("partial exact Re(P_A1 P_B2)_w", recon.re_weak_product, 0, sys_tol)
        plan = MeasurementPlan.pm(shots, child_seed(seed, 0))
        recon = pm_weak_values(partial_tomography_pm(exact, plan), b)
        # 3 sigma of <s>/(4 beta) per term, summed for the product
        stat = 3 / (2 * b * math.sqrt(shots))
        for label, val, target in (("Re(P_A1)_w", recon.re_weak_a, 1),
                                   ("Re(P_B2)_w", recon.re_weak_b, 1),
                                   ("Re(P_A1 P_B2)_w", recon.re_weak_product, 0)):
            rep.add(f"partial sampled {label}", ValueEstimate(val, "tomographic", stat / 3),
                    target, sys_tol + stat)

    if "full" in modes:
        plan = MeasurementPlan.pauli(2, shots, child_seed(seed, 1))
        est = extract_modular_multi(linear_inversion(sample_counts(exact, plan)), initial.amps)
        m_b, m_a, m_ab = est[1], est[2], est[3]
        _modular_and_weak(rep, "full", m_a, m_b, m_ab, exact_a, exact_b, exact_sum)

    if "split" in modes:
        a0 = b0 = 1 / math.sqrt(2)
        m = {}
        for key, obs in ((2, pa), (3, pb)):
            meter = QubitMeterState(a0, b0)
            out = brute_force_evolve(tsv, CouplingSpec((CouplingTerm(0, obs, k),)), meter.as_state()).state
            plan = MeasurementPlan.pauli(1, shots, child_seed(seed, key))
            m[key] = extract_modular_multi(linear_inversion(sample_counts(out, plan)),
                                           meter.as_state().amps)[1]
        spec = MultiQubitMeterSpec(2, a0, b0)
        out = brute_force_evolve(tsv, multi_qubit_coupling([pa, pb], k), spec.initial_state()).state
        plan = MeasurementPlan.pauli(2, shots, child_seed(seed, 4))
        m_ab = extract_modular_multi(linear_inversion(sample_counts(out, plan)), spec.initial_state().amps)[3]
        _modular_and_weak(rep, "split", m[2], m[3], m_ab, exact_a, exact_b, exact_sum)
    return rep


def _modular_and_weak(rep, prefix, m_a, m_b, m_ab, exact_a, exact_b, exact_sum):
    rep.add(f"{prefix} (P_A1)_m", _tomographic(m_a), exact_a, 3 * m_a.stderr)
    rep.add(f"{prefix} (P_B2)_m", _tomographic(m_b), exact_b, 3 * m_b.stderr)
    rep.add(f"{prefix} (P_A1+P_B2)_m", _tomographic(m_ab), exact_sum, 3 * m_ab.stderr)
    wa = ValueEstimate((1 - m_a.value) / 2, "tomographic", m_a.stderr / 2)
    wb = ValueEstimate((1 - m_b.value) / 2, "tomographic", m_b.stderr / 2)
    # linear sum bounds the stderr regardless of correlations
    wab = ValueEstimate((m_ab.value - m_a.value - m_b.value + 1) / 4, "tomographic",
                        (m_ab.stderr + m_a.stderr + m_b.stderr) / 4)
    rep.add(f"{prefix} (P_A1)_w", wa, 1, 3 * wa.stderr)
    rep.add(f"{prefix} (P_B2)_w", wb, 1, 3 * wb.stderr)
    rep.add(f"{prefix} (P_A1 P_B2)_w", wab, 0, 3 * wab.stderr)


SCENARIOS = {
    "hardy": hardy_report,
    "spin-hardy": spin_hardy_report,
    "projector-identities": projector_identities_check,
    "osaka": osaka_experiment,
}
