"""
Continuous von Neumann pointers on a discretized position grid.

Conventions (hbar = 1):

* grid points ``q_j = q_min + j * dq`` with ``dq = (q_max - q_min) / n``;
* momentum axis ``p_j = 2 pi j / (n dq)`` for ``j`` in ``[-n/2, n/2)``, i.e.
  ``2 pi * fftshift(fftfreq(n, dq))``;
* initial pointer ``(Delta^2 pi)^(-1/4) exp(-Q^2 / 2 Delta^2)``, so that
  ``Var(Q) = Delta^2 / 2`` and ``Var(P) = 1 / (2 Delta^2)``;
* the coupling ``k P (x) C`` translates eigenbranch ``lambda_j`` by
  ``k lambda_j``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import LocalObservable, as_operator, embed_local, spectral_radius
from .errors import GridError, NonGaussianPointer, PostSelectionImpossible
from .twostate import TwoStateVector

GRID_MARGIN = 8.0  # widths kept clear of either boundary


@dataclass(frozen=True)
class PointerGrid:
    q_min: float
    q_max: float
    n: int = 1024

    def __post_init__(self):
        if not self.q_max > self.q_min:
            raise ValueError("q_max must exceed q_min")
        if self.n < 64 or self.n & (self.n - 1):
            raise ValueError(f"grid size must be a power of two >= 64, got {self.n}")

    @property
    def dq(self) -> float:
        return (self.q_max - self.q_min) / self.n

    @property
    def q(self) -> np.ndarray:
        return self.q_min + self.dq * np.arange(self.n)

    @property
    def p(self) -> np.ndarray:
        return 2 * np.pi * np.fft.fftshift(np.fft.fftfreq(self.n, self.dq))

    @property
    def dp(self) -> float:
        return 2 * np.pi / (self.n * self.dq)


def default_grid(delta: float, k: float = 0.0, radius: float = 0.0, n: int = 1024) -> PointerGrid:
    """Symmetric grid ``[-16 delta - k radius, 16 delta + k radius]``."""
    half = 16 * delta + abs(k) * radius
    return PointerGrid(-half, half, n)


def gaussian_amplitude(q: np.ndarray, center: complex, delta: float) -> np.ndarray:
    """Unnormalized-by-shift Gaussian ``(Delta^2 pi)^(-1/4) exp(-(q - center)^2 / 2 Delta^2)``.

    ``center`` may be complex, which is the closed-form analytic continuation
    of a translation.
    """
    return (delta ** 2 * np.pi) ** -0.25 * np.exp(-(q - center) ** 2 / (2 * delta ** 2))


@dataclass(frozen=True, eq=False)
class GaussianPointerState:
    """Pointer wavefunction sampled on ``grid``.

    ``delta`` is the width of the Gaussian the pointer was prepared in; the
    amplitudes themselves need not remain Gaussian after exact evolution.
    """

    grid: PointerGrid
    delta: float
    amps: np.ndarray

    def __post_init__(self):
        if self.delta <= 0:
            raise ValueError("pointer width must be positive")
        amps = np.array(self.amps, dtype=complex)
        if amps.shape != (self.grid.n,):
            raise ValueError("amplitude count does not match the grid")
        norm = np.sum(np.abs(amps) ** 2) * self.grid.dq
        if abs(norm - 1) > 1e-10:
            raise ValueError(f"pointer not normalized: norm = {norm!r}")
        peak = np.max(np.abs(amps))
        if max(abs(amps[0]), abs(amps[-1])) > 1e-8 * peak:
            raise GridError("pointer amplitude at the grid boundary (wraparound risk)")
        amps.setflags(write=False)
        object.__setattr__(self, "amps", amps)

    @property
    def q_density(self) -> np.ndarray:
        return np.abs(self.amps) ** 2

    def q_mean(self) -> float:
        return float(np.sum(self.grid.q * self.q_density) * self.grid.dq)

    def q_var(self) -> float:
        m = self.q_mean()
        return float(np.sum((self.grid.q - m) ** 2 * self.q_density) * self.grid.dq)


@dataclass(frozen=True)
class MomentumDistribution:
    p: np.ndarray
    density: np.ndarray

    @property
    def dp(self) -> float:
        return float(self.p[1] - self.p[0])

    def total(self) -> float:
        return float(np.sum(self.density) * self.dp)

    def mean(self) -> float:
        return float(np.sum(self.p * self.density) * self.dp)

    def var(self) -> float:
        m = self.mean()
        return float(np.sum((self.p - m) ** 2 * self.density) * self.dp)


def _normalized(grid: PointerGrid, amps: np.ndarray) -> np.ndarray:
    norm = math.sqrt(np.sum(np.abs(amps) ** 2) * grid.dq)
    return amps / norm


def init_gaussian(grid: PointerGrid, delta: float) -> GaussianPointerState:
    if delta <= 0:
        raise ValueError("pointer width must be positive")
    if grid.q_max < GRID_MARGIN * delta or grid.q_min > -GRID_MARGIN * delta:
        raise GridError(f"grid [{grid.q_min}, {grid.q_max}] narrower than +-{GRID_MARGIN} delta")
    amps = gaussian_amplitude(grid.q, 0.0, delta)
    return GaussianPointerState(grid, delta, _normalized(grid, amps))


def momentum_distribution(pointer: GaussianPointerState) -> MomentumDistribution:
    grid = pointer.grid
    spectrum = np.fft.fftshift(np.fft.fft(pointer.amps))
    density = np.abs(spectrum) ** 2
    density = density / (np.sum(density) * grid.dp)
    return MomentumDistribution(grid.p, density)


def _fourier_shift(grid: PointerGrid, amps: np.ndarray, shift: float) -> np.ndarray:
    p = 2 * np.pi * np.fft.fftfreq(grid.n, grid.dq)
    return np.fft.ifft(np.fft.fft(amps) * np.exp(-1j * p * shift))


def _check_margin(grid: PointerGrid, delta: float, centers):
    lo = grid.q_min + GRID_MARGIN * delta
    hi = grid.q_max - GRID_MARGIN * delta
    for c in np.atleast_1d(centers):
        if not lo <= c <= hi:
            raise GridError(f"shifted branch centered at {c:.4g} within {GRID_MARGIN} delta of the grid boundary")


def von_neumann_joint(tsv: TwoStateVector, C, k: float, pointer: GaussianPointerState) -> np.ndarray:
    """Joint ``system (x) pointer`` amplitudes after ``exp(-ik P C)``, before post-selection.

    Returned as a ``(system dim, n)`` array.
    """
    grid = pointer.grid
    c = as_operator(C, tsv.space)
    if not c.is_hermitian():
        raise ValueError("von Neumann coupling requires a Hermitian observable")
    evals, evecs = np.linalg.eigh((c.entries + c.entries.conj().T) / 2)
    _check_margin(grid, pointer.delta, pointer.q_mean() + k * evals)
    coeffs = evecs.conj().T @ tsv.pre.normalized().amps
    joint = np.zeros((tsv.space.total, grid.n), dtype=complex)
    for lam, vec, cj in zip(evals, evecs.T, coeffs):
        joint += np.outer(vec * cj, _fourier_shift(grid, pointer.amps, k * lam))
    return joint


def von_neumann_exact(tsv: TwoStateVector, C, k: float, pointer: GaussianPointerState) -> GaussianPointerState:
    """Exact post-selected pointer; no weak-coupling approximation."""
    joint = von_neumann_joint(tsv, C, k, pointer)
    out = tsv.post.normalized().amps.conj() @ joint
    if np.sum(np.abs(out) ** 2) * pointer.grid.dq < 1e-28:
        raise PostSelectionImpossible("post-selected pointer vanishes")
    return GaussianPointerState(pointer.grid, pointer.delta, _normalized(pointer.grid, out))


def effective_shift(pointer: GaussianPointerState, weak: complex, k: float = 1.0) -> GaussianPointerState:
    """Pointer translated by the complex amount ``k * weak``, evaluated in closed form."""
    grid, delta = pointer.grid, pointer.delta
    reference = _normalized(grid, gaussian_amplitude(grid.q, 0.0, delta))
    if np.max(np.abs(np.abs(pointer.amps) - reference)) > 1e-8 * np.max(reference):
        raise NonGaussianPointer("effective shift needs the centered Gaussian pointer")
    shift = k * complex(weak)
    _check_margin(grid, delta, shift.real)
    amps = gaussian_amplitude(grid.q, shift, delta)
    return GaussianPointerState(grid, delta, _normalized(grid, amps))


def pointer_fidelity(a: GaussianPointerState, b: GaussianPointerState) -> float:
    ov = np.vdot(a.amps, b.amps) * a.grid.dq
    return float(abs(ov) ** 2)


# -- two-pointer correlations ------------------------------------------------

@dataclass(frozen=True)
class RSMoments:
    """Raw second-order correlations of two post-selected pointers."""

    k: float
    delta: float
    qq: float
    pp: float
    probability: float

    @property
    def estimate(self) -> float:
        # 4 Var(Q)^2 with Var(Q) = delta^2 / 2
        return (self.qq - self.delta ** 4 * self.pp) / self.k ** 2


def rs_moments(tsv: TwoStateVector, A: LocalObservable, B: LocalObservable, k: float,
               delta: float = 1.0, grid: PointerGrid | None = None) -> RSMoments:
    """``<Q_A Q_B>`` and ``<P_A P_B>`` after exact two-pointer evolution and post-selection.

    Pointer A couples to ``A`` and pointer B to ``B``, both at strength ``k``,
    starting from the product Gaussian of width ``delta``.
    """
    if A.site == B.site:
        raise ValueError("A and B must act on distinct sites")
    if not k > 0:
        raise ValueError("coupling strength must be positive")
    space = tsv.space
    if grid is None:
        grid = default_grid(delta, k, max(spectral_radius(A.op), spectral_radius(B.op)))
    if grid.q_max < GRID_MARGIN * delta or grid.q_min > -GRID_MARGIN * delta:
        raise GridError("grid narrower than the initial pointer")

    la, va = np.linalg.eigh(A.op.entries)
    lb, vb = np.linalg.eigh(B.op.entries)
    _check_margin(grid, delta, np.concatenate([k * la, k * lb]))

    pre = tsv.pre.normalized().amps
    post = tsv.post.normalized().amps
    weights = np.empty((la.size, lb.size), dtype=complex)
    for i, a_vec in enumerate(va.T):
        ea = embed_local(LocalObservable(A.site, np.outer(a_vec, a_vec.conj())), space).entries
        for j, b_vec in enumerate(vb.T):
            eb = embed_local(LocalObservable(B.site, np.outer(b_vec, b_vec.conj())), space).entries
            weights[i, j] = post.conj() @ ea @ eb @ pre

    q = grid.q
    fa = np.array([gaussian_amplitude(q, k * lam, delta) for lam in la])
    fb = np.array([gaussian_amplitude(q, k * lam, delta) for lam in lb])
    psi = fa.T @ weights @ fb  # psi[Q_A, Q_B]

    rho = np.abs(psi) ** 2
    total = rho.sum()
    prob = float(total * grid.dq ** 2)
    if prob < 1e-28:
        raise PostSelectionImpossible("post-selected two-pointer state vanishes")
    qq = float(q @ rho @ q / total)

    rho_p = np.abs(np.fft.fft2(psi)) ** 2
    p = 2 * np.pi * np.fft.fftfreq(grid.n, grid.dq)
    pp = float(p @ rho_p @ p / rho_p.sum())
    return RSMoments(k, delta, qq, pp, prob)


def rs_estimate(tsv: TwoStateVector, A: LocalObservable, B: LocalObservable, k: float,
                delta: float = 1.0, grid: PointerGrid | None = None) -> float:
    """Estimate of ``Re (AB)_w`` from two-pointer correlations.

    Uses ``(<Q_A Q_B> - 4 Var(Q)^2 <P_A P_B>) / k^2`` with the initial
    pointer variance ``Var(Q) = delta^2 / 2``.
    """
    return rs_moments(tsv, A, B, k, delta, grid).estimate
