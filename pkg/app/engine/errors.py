"""
# Engine errors
"""


class IncidenceError(ValueError):
    """Base class for every error raised by the incidence engine."""


class FieldError(IncidenceError):
    """Invalid field parameters or an impossible field operation (e.g. inverting zero)."""


class GeometryError(IncidenceError):
    """Invalid geometric input: zero vectors, zero normals, dimension mismatches."""


class SizeCapError(IncidenceError):
    """A requested enumeration or structure exceeds the configured desk-scale caps."""


class ConvergenceError(IncidenceError):
    """An iterative eigensolver hit its iteration cap before reaching tolerance."""

    def __init__(self, message: str, residual: float, iterations: int):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class ExperimentConfigError(IncidenceError):
    """An experiment configuration could not be parsed or names unsupported parameters."""
