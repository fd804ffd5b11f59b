"""Reference computations that share no code with the package.

Every quantity here is built from raw numpy arrays and ``scipy.linalg.expm``,
so agreement with ``modval`` is a genuine cross-check.
"""
import numpy as np
from scipy.linalg import expm

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
P0 = np.array([[1, 0], [0, 0]], dtype=complex)
P1 = np.array([[0, 0], [0, 1]], dtype=complex)


def unit(v):
    v = np.asarray(v, dtype=complex)
    return v / np.linalg.norm(v)


def lift(op, site, dims):
    """Kronecker embedding, subsystem 0 leftmost."""
    mats = [np.eye(d) for d in dims]
    mats[site] = op
    out = mats[0]
    for m in mats[1:]:
        out = np.kron(out, m)
    return out


def weak(pre, post, C):
    pre, post = unit(pre), unit(post)
    return np.vdot(post, C @ pre) / np.vdot(post, pre)


def modular(pre, post, C, k):
    pre, post = unit(pre), unit(post)
    return np.vdot(post, expm(-1j * k * C) @ pre) / np.vdot(post, pre)


def meter_after(pre, post, terms, meter0, meter_dims):
    """Post-selected meter for ``H = sum k_i C_i (x) M_i``; terms are (C_full, meter_op_full, k)."""
    ds = len(pre)
    dm = int(np.prod(meter_dims))
    H = sum(k * np.kron(C, M) for C, M, k in terms) if terms else np.zeros((ds * dm, ds * dm))
    joint = expm(-1j * H) @ np.kron(unit(pre), unit(meter0))
    out = np.conj(unit(post)) @ joint.reshape(ds, dm)
    return unit(out)


def fid(a, b):
    return abs(np.vdot(a, b)) ** 2 / (np.vdot(a, a).real * np.vdot(b, b).real)


def rand_state(rng, dim):
    return unit(rng.normal(size=dim) + 1j * rng.normal(size=dim))


def rand_herm(rng, dim):
    m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return (m + m.conj().T) / 2


def rand_pauli_type(rng):
    """``n . sigma`` for a random unit vector ``n``: eigenvalues +-1."""
    n = rng.normal(size=3)
    n /= np.linalg.norm(n)
    return n[0] * SX + n[1] * SY + n[2] * SZ


def rand_rank1_projector(rng, dim=2):
    v = rand_state(rng, dim)
    return np.outer(v, v.conj())


def rand_tsv(rng, dim, min_overlap=0.01):
    while True:
        pre, post = rand_state(rng, dim), rand_state(rng, dim)
        if abs(np.vdot(post, pre)) > min_overlap:
            return pre, post


# Hardy states entered by hand: A,B -> index 0; C,D -> index 1
HARDY_PRE = np.array([0, 1, 1, 1]) / np.sqrt(3)  # |AD> + |CD> + |CB>
HARDY_POST = np.array([1, -1, -1, 1]) / 2        # (<A| - <C|)(<B| - <D|)
