"""Exception types raised by the library.

Each failure mode has its own class so callers can react to the specific
numerical problem (non-PSD matrix, stalled line search, degenerate
covariance, ...) instead of parsing messages.
"""


class MestrateError(Exception):
    """Base class for all library errors."""


class InvalidMatrix(MestrateError):
    """Input matrix is non-finite, non-square or not symmetric."""


class NotPSD(MestrateError):
    """Matrix has an eigenvalue below the PSD clamping threshold."""


class NotPD(MestrateError):
    """Matrix is not numerically positive definite (Cholesky failed)."""


class NotInvertible(MestrateError):
    """Matrix is singular or too ill-conditioned to invert."""


class InvalidArgument(MestrateError):
    """Scalar or parameter argument outside its valid domain."""


class BadStart(MestrateError):
    """Objective evaluated to a non-finite value at a starting point."""

    def __init__(self, start_index, message=None):
        self.start_index = start_index
        super().__init__(message or f"objective non-finite at start {start_index}")


class StalledStart(MestrateError):
    """Every start exhausted its line-search backtracking budget."""


class SizeMismatch(MestrateError):
    """Paired samples have different sizes."""


class TooLarge(MestrateError):
    """Sample count exceeds the exact-assignment solver cap."""


class TooFewSamples(MestrateError):
    """Fewer than two samples supplied to an empirical estimator."""


class NotCentered(MestrateError):
    """Quadratic-form matrices violate the Tr(A K) = 0 centering."""


class DegenerateC(MestrateError):
    """Quadratic-form covariance matrix is numerically singular."""


class StepOutOfDomain(MestrateError):
    """Finite-difference stencil would leave the parameter box."""


class ModelInconsistency(MestrateError):
    """An internal model identity failed beyond tolerance (likely a derivative bug)."""


class ConditionsViolated(MestrateError):
    """Model regularity diagnostics failed for the requested experiment."""

    def __init__(self, detail):
        self.detail = detail
        super().__init__(f"condition diagnostics failed: {detail}")


class UnstableExperiment(MestrateError):
    """Too many replications failed to minimize; aborting the study."""


class ConfigError(MestrateError):
    """Experiment configuration is malformed."""
