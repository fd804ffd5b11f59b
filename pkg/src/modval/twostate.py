"""Two-state vectors, weak values and modular values."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import (HilbertDims, LocalObservable, OperatorMatrix, StateVector, _as_dims,
                   _check_same, apply, as_operator, embed_local, herm_exp, inner)
from .errors import OrthogonalSelection

ORTHOGONALITY_THRESHOLD = 1e-12

PROVENANCES = ("exact", "effective", "tomographic")


@dataclass(frozen=True)
class ValueEstimate:
    value: complex
    provenance: str = "exact"
    stderr: float = 0.0

    def __post_init__(self):
        if self.provenance not in PROVENANCES:
            raise ValueError(f"provenance must be one of {PROVENANCES}")
        if self.stderr < 0:
            raise ValueError("stderr must be nonnegative")
        if self.provenance == "exact" and self.stderr != 0:
            raise ValueError("exact values carry no statistical error")
        object.__setattr__(self, "value", complex(self.value))
        object.__setattr__(self, "stderr", float(self.stderr))

    def __complex__(self):
        return self.value


@dataclass(frozen=True, eq=False)
class TwoStateVector:
    """Pre-selected ket ``pre`` and post-selected state ``post``.

    ``post`` is stored as a ket; it is conjugated when used as the bra
    ``<phi|``. Neither state is normalized at construction, so coefficients
    can be entered verbatim.
    """

    pre: StateVector
    post: StateVector

    def __post_init__(self):
        _check_same(self.pre.space, self.post.space)
        if self.pre.norm == 0 or self.post.norm == 0:
            raise ValueError("pre- and post-selected states must have nonzero norm")

    @classmethod
    def from_amplitudes(cls, pre, post, dims=None) -> "TwoStateVector":
        return cls(StateVector.from_amplitudes(pre, dims), StateVector.from_amplitudes(post, dims))

    @property
    def space(self) -> HilbertDims:
        return self.pre.space


def overlap(tsv: TwoStateVector) -> complex:
    """``<phi|psi>`` on normalized states."""
    return inner(tsv.post.normalized(), tsv.pre.normalized())


def _amplitude(tsv: TwoStateVector, op: OperatorMatrix) -> complex:
    pre, post = tsv.pre.normalized(), tsv.post.normalized()
    return inner(post, apply(op, pre))


def weak_value(tsv: TwoStateVector, C) -> ValueEstimate:
    """``<phi|C|psi> / <phi|psi>``.

    ``C`` may be an ``OperatorMatrix`` on the full space, a ``LocalObservable``
    or a bare matrix. It need not be Hermitian: products of local observables
    are legal inputs.
    """
    op = as_operator(C, tsv.space)
    ov = overlap(tsv)
    if abs(ov) < ORTHOGONALITY_THRESHOLD:
        raise OrthogonalSelection(ov)
    return ValueEstimate(_amplitude(tsv, op) / ov)


def modular_value(tsv: TwoStateVector, C, k: float) -> ValueEstimate:
    """``<phi|exp(-ikC)|psi> / <phi|psi>`` for Hermitian ``C``."""
    u = herm_exp(as_operator(C, tsv.space), k)
    ov = overlap(tsv)
    if abs(ov) < ORTHOGONALITY_THRESHOLD:
        raise OrthogonalSelection(ov, _amplitude(tsv, u))
    return ValueEstimate(_amplitude(tsv, u) / ov)


def combination_generator(space, terms: Sequence[tuple[LocalObservable, float]]) -> OperatorMatrix:
    """``sum_i k_i C_i`` with every ``C_i`` embedded at its own site."""
    space = _as_dims(space)
    sites = [obs.site for obs, _ in terms]
    if len(set(sites)) != len(sites):
        raise ValueError(f"duplicate sites in combination: {sites}")
    total = np.zeros((space.total, space.total), dtype=complex)
    for obs, k in terms:
        total += float(k) * embed_local(obs, space).entries
    return OperatorMatrix(space, total)


def modular_value_combination(tsv: TwoStateVector,
                              terms: Sequence[tuple[LocalObservable, float]]) -> ValueEstimate:
    """Modular value of ``sum_i k_i C_i`` at unit overall strength."""
    if not terms:
        raise ValueError("need at least one term")
    return modular_value(tsv, combination_generator(tsv.space, terms), 1.0)


def product_operator(space, observables: Sequence[LocalObservable]) -> OperatorMatrix:
    """Operator product of local embeddings (not a Hamiltonian term)."""
    space = _as_dims(space)
    m = np.eye(space.total, dtype=complex)
    for obs in observables:
        m = m @ embed_local(obs, space).entries
    return OperatorMatrix(space, m)
