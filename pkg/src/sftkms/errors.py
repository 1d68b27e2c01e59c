"""Exception hierarchy.

Every error raised by the library derives from :class:`SftKmsError`, so
callers (the CLI in particular) can map families of failures to exit codes.
"""

from __future__ import annotations


class SftKmsError(Exception):
    """Base class for all library errors."""


# -- shift spaces and cylinder functions -----------------------------------

class SftError(SftKmsError, ValueError):
    """Invalid shift-space definition."""


class BadShape(SftError):
    pass


class RowDead(SftError):
    """A symbol has no admissible successor."""


class NotSurjective(SftError):
    """A symbol has no admissible predecessor, so the shift is not onto."""


class DepthDecrease(SftKmsError, ValueError):
    pass


class SftMismatch(SftKmsError, ValueError):
    pass


class NonPositive(SftKmsError, ValueError):
    """log / real power requested of a function that is not strictly positive."""


class NotInRange(SftKmsError, ValueError):
    """Function is not constant on the fibres of the iterated shift."""


# -- operators ---------------------------------------------------------------

class DepthTooSmall(SftKmsError, ValueError):
    pass


class DepthMismatch(SftKmsError, ValueError):
    pass


class DimensionCapExceeded(SftKmsError, ValueError):
    pass


class MixedIndices(SftKmsError, ValueError):
    pass


class NotUnitary(SftKmsError, ValueError):
    pass


class NotPositive(SftKmsError, ValueError):
    pass


# -- thermodynamics ------------------------------------------------------------

class KmsError(SftKmsError):
    """Failures of the equilibrium-state solver."""


class PotentialNotAboveOne(KmsError, ValueError):
    pass


class NotNonnegative(KmsError, ValueError):
    pass


class ConvergenceFailure(KmsError, RuntimeError):
    pass


class NoRoot(KmsError):
    pass


class NotPrimitive(KmsError):
    """The transition matrix is not primitive, so the eigenmeasure is ambiguous."""


class MultiplePerron(NotPrimitive):
    pass


class NoKmsState(KmsError):
    """No equilibrium state exists at the requested inverse temperature.

    ``rho`` carries the spectral radius found, so the caller can decide
    whether to re-solve for the critical temperature.
    """

    def __init__(self, rho: float, beta: float):
        super().__init__(
            f"no KMS state at beta={beta!r}: spectral radius {rho!r} != 1"
        )
        self.rho = rho
        self.beta = beta


class ResidualExceeded(KmsError):
    def __init__(self, message: str, residual: float, worst=None):
        super().__init__(message)
        self.residual = residual
        self.worst = worst


class ConfigError(SftKmsError, ValueError):
    pass
