"""Exception hierarchy.

``ModvalError`` subclasses are *domain* errors: the inputs were well formed but
the physics has no answer (orthogonal selection, impossible post-selection,
ill-conditioned readout). Malformed inputs raise plain ``ValueError``.
"""


class ModvalError(Exception):
    """Base class for domain errors."""


class OrthogonalSelection(ModvalError):
    """Post-selection (numerically) orthogonal to pre-selection.

    Weak and modular values are undefined here. Both amplitudes are kept on the
    exception, uninterpreted, so callers can inspect them.
    """

    def __init__(self, overlap, numerator=None, message=None):
        self.overlap = complex(overlap)
        self.numerator = None if numerator is None else complex(numerator)
        if message is None:
            message = f"|<phi|psi>| = {abs(self.overlap):.3e} is below the orthogonality threshold"
            if self.numerator is not None:
                message += (f"; <phi|exp(-ikC)|psi> = {self.numerator:.6g}"
                            " (a qubit meter would end in |1>)")
        super().__init__(message)


class PostSelectionImpossible(ModvalError):
    """The post-selected (unnormalized) output is identically zero."""


class IllConditioned(ModvalError):
    """Readout amplitude too small to divide by."""


class IncompleteBasis(ModvalError):
    """Measurement bases are not informationally complete."""


class GridError(ModvalError):
    """Position grid too narrow for the pointer or its shifted branches."""


class NonGaussianPointer(ModvalError):
    """The closed-form complex shift only applies to Gaussian pointers."""
