"""Exception and warning classes shared across the package."""


class OctoportError(Exception):
    """Base class for all package errors."""


class ConfigurationError(OctoportError, ValueError):
    """Invalid cutoff, mode pair, state specification or similar input."""


class ConfigValidationError(ConfigurationError):
    """A configuration file failed validation; carries every problem found."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


class TruncationError(OctoportError):
    """Probability mass lost to Fock truncation exceeds the allowed budget."""

    def __init__(self, message, deficit):
        super().__init__(f"{message} (deficit={deficit:.3e})")
        self.deficit = deficit


class ConventionError(OctoportError):
    """A constructed beam splitter failed its coherent-state probe."""


class NumericalAccuracyError(OctoportError):
    """An adaptive quadrature or tolerance check did not converge."""


class InfeasibleError(OctoportError):
    """The requested computation exceeds the configured resource limits."""


class TruncationWarning(UserWarning):
    pass


class BoundaryAtomWarning(UserWarning):
    """An outcome atom sits on the boundary of a test set."""


class AccuracyWarning(UserWarning):
    pass
