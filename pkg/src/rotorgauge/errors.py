"""Exception hierarchy and warning categories.

The CLI maps these onto exit codes: configuration/domain problems exit 2,
data problems exit 3, numerical failures exit 4.
"""


class RotorError(Exception):
    """Base class for all package errors."""


class DomainError(RotorError, ValueError):
    """A physical parameter is outside its valid domain."""


class ConfigError(RotorError):
    """Configuration file is malformed or violates the schema."""


class DataError(RotorError):
    """Input data cannot support the requested operation."""


class NoDetectionError(DataError):
    """No spectral peak rises above the noise floor."""


class NumericalError(RotorError):
    """A numerical procedure failed (ill-conditioning, underflow, ...)."""


class MolecularFlowWarning(UserWarning):
    """Pressure is above the molecular-flow validity threshold (~1e-4 mbar)."""


class LinearizationWarning(UserWarning):
    """Fluctuations too large for the log-frequency linearization."""
