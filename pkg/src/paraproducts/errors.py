"""Exception hierarchy shared by all modules."""


class ParaproductError(Exception):
    """Base class for every error raised by this package."""


class GeometryError(ParaproductError):
    """Grid functions or cubes with incompatible geometry."""


class GridFormatError(ParaproductError):
    """Malformed or inconsistent GFN1 payload."""


class FilterError(ParaproductError):
    """Unknown filter name or taps violating the MRA invariants."""


class LevelError(ParaproductError):
    """Requested scale outside the range supported by the grid."""


class NumericalError(ParaproductError):
    """An iterative or spectral computation failed its own accuracy check."""

    def __init__(self, message, **details):
        super().__init__(message)
        self.details = details


class DomainError(ParaproductError):
    """Input outside the domain of a functional (e.g. nonzero scaling part)."""


class ConfigurationError(ParaproductError):
    """Invalid kernel, run configuration or corpus specification."""


class AtomError(ParaproductError):
    """A coefficient set failed the psi-atom conditions."""

    def __init__(self, message, violations=()):
        super().__init__(message)
        self.violations = list(violations)
