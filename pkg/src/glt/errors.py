"""Exception types shared across the library."""


class GltError(Exception):
    """Base class for library-specific failures."""


class ConvergenceError(GltError):
    """An iterative solver did not reach the requested accuracy."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class GapClosureError(GltError):
    """The spectral gap closed (or fell below tolerance) at a parameter point."""

    def __init__(self, message, location=None, gap=None):
        super().__init__(message)
        self.location = location
        self.gap = gap


class NotAnEigenvectorError(GltError):
    """A state expected to be an operator eigenvector is not one.

    Typically raised for translation eigenvalues of a vector picked from a
    degenerate block; resolve the block with simultaneous_block_diagonalize
    first.
    """


class UnreliablePhaseError(GltError):
    """A transported state returned with too small an overlap for its phase to mean anything."""

    def __init__(self, message, overlap=None):
        super().__init__(message)
        self.overlap = overlap


class QuantizationError(GltError):
    """A quantity that should be integer-quantized deviates beyond tolerance."""

    def __init__(self, message, value=None, deviation=None):
        super().__init__(message)
        self.value = value
        self.deviation = deviation


class ConfigError(GltError):
    """A run configuration failed schema validation."""
