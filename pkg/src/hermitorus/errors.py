"""Exception types shared across the package."""


class HermitorusError(Exception):
    """Base class for all package-specific errors."""


class DimensionMismatch(HermitorusError):
    """Inputs refer to different grids or incompatible dimensions."""


class PositivityViolation(HermitorusError):
    """A matrix field failed its positive-definiteness check.

    Carries the worst grid point and the offending eigenvalue.
    """

    def __init__(self, message, point=None, eigenvalue=None):
        super().__init__(message)
        self.point = point
        self.eigenvalue = eigenvalue


class SingularWedgeMap(HermitorusError):
    """The pointwise wedge system for the torsion 1-form is ill-conditioned."""


class NonConvergence(HermitorusError):
    """An iterative solver exhausted its budget before reaching tolerance."""

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class SignIndefinite(HermitorusError):
    """The computed kernel element changes sign beyond tolerance."""


class IncompatibleRHS(HermitorusError):
    """Right-hand side violates the integral compatibility condition."""


class EigenFailure(HermitorusError):
    """A pointwise eigenvalue problem failed to converge."""

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class CertificateFailed(HermitorusError):
    """The negativity certificate could not be established numerically."""


class ConfigError(HermitorusError):
    """Configuration file failed schema validation or parsing."""
