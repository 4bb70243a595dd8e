"""Exception types shared across the package."""


class FerroGammaError(Exception):
    """Base class for all package-specific errors."""


class InvalidFieldError(FerroGammaError, ValueError):
    """Field arrays do not match their grid (shape/size mismatch)."""


class OutOfRangeError(FerroGammaError, ValueError):
    """A sample point lies outside the grid's trilinear interpolation range."""


class KernelDomainError(FerroGammaError, ValueError):
    """Kernel evaluated at a non-positive radius."""


class SolverConfigError(FerroGammaError, RuntimeError):
    """Solver configuration is inadequate (e.g. padding too small for decay)."""


class InvalidTestFunctionError(FerroGammaError, ValueError):
    """Weak-form test function is nonzero on the padded boundary shell."""


class ConstraintViolationError(FerroGammaError, ValueError):
    """Unit-length constraint requested but the field is not unit length."""


class DegenerateInputError(FerroGammaError, ValueError):
    """Field contains non-finite values (NaN/Inf)."""


class WrongRegimeError(FerroGammaError, ValueError):
    """A check was called on a field outside its regime (tangential vs not)."""


class DivergenceError(FerroGammaError, RuntimeError):
    """Descent encountered a non-finite energy; carries the partial trace."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class FormatError(FerroGammaError, ValueError):
    """Malformed field file or config (reports the offending byte offset)."""


class ConfigError(FerroGammaError, ValueError):
    """Invalid run configuration value."""
