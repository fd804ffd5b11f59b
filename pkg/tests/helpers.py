"""Small constructors shared by the test modules."""
import numpy as np

from modval.core import HilbertDims, LocalObservable, OperatorMatrix
from modval.twostate import TwoStateVector


def make_tsv(pre, post, dims=None):
    pre = np.asarray(pre, dtype=complex)
    if dims is None:
        dims = (pre.size,)
    return TwoStateVector.from_amplitudes(pre, post, dims)


def local(site, m):
    return LocalObservable(site, OperatorMatrix.from_matrix(m))


def full(m, dims):
    return OperatorMatrix(HilbertDims(tuple(dims)), np.asarray(m, dtype=complex))
