"""Weak values, modular values and their measurement by qubit meters and Gaussian pointers."""

__version__ = "0.1.0"

from .core import (HilbertDims, LocalObservable, OperatorMatrix, StateVector, basis_state, herm_exp,
                   pauli, projector, tensor)
from .errors import (GridError, IllConditioned, IncompleteBasis, ModvalError, NonGaussianPointer,
                     OrthogonalSelection, PostSelectionImpossible)
from .twostate import TwoStateVector, ValueEstimate, modular_value, modular_value_combination, weak_value

__all__ = [
    "__version__", "HilbertDims", "LocalObservable", "OperatorMatrix", "StateVector", "basis_state",
    "herm_exp", "pauli", "projector", "tensor", "GridError", "IllConditioned", "IncompleteBasis",
    "ModvalError", "NonGaussianPointer", "OrthogonalSelection", "PostSelectionImpossible",
    "TwoStateVector", "ValueEstimate", "modular_value", "modular_value_combination", "weak_value",
]
