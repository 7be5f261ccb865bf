"""Exception types raised by wentzell_lab."""


class WentzellError(Exception):
    """Base class for all errors raised by this package."""


class MeshError(WentzellError, ValueError):
    pass


class FieldError(WentzellError, ValueError):
    pass


class HypothesisError(WentzellError, ValueError):
    """Coefficient data violates the ellipticity floor (alpha, beta >= eta)."""

    def __init__(self, report):
        self.report = report
        super().__init__(str(report))


class FactorizationError(WentzellError, ArithmeticError):
    """A matrix that must be SPD could not be factorized."""


class FluxRecoveryError(WentzellError, ValueError):
    """The supplied Laplacian datum is inconsistent with the function."""


class AmbiguousKernelError(WentzellError):
    """First eigenvalue is inside the zero band but its eigenvector is not constant."""


class OracleError(WentzellError):
    """The 1D oracle could not find the requested roots."""

    def __init__(self, message, found=None):
        super().__init__(message)
        self.found = [] if found is None else list(found)


class ConfigError(WentzellError, ValueError):
    """Malformed scenario configuration."""
