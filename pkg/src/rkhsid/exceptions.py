"""Exception hierarchy shared across the package.

``NumericalError`` subclasses signal failures of a numerical procedure on
valid inputs (exit code 3 at the CLI); ``ConfigError`` signals a bad run
configuration (exit code 2). Plain ``ValueError`` is reserved for misuse of
library APIs (wrong shapes, out-of-range arguments).
"""


class NumericalError(RuntimeError):
    """A numerical procedure failed on otherwise valid inputs."""


class ConditioningError(NumericalError):
    """Gram matrix could not be factorized within the jitter budget."""


class StabilityError(NumericalError):
    """A matrix required to be Hurwitz is not."""


class DivergenceError(NumericalError):
    """Simulated state became non-finite."""

    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class TraceNotClosedError(NumericalError):
    """Level-set trace did not return to its seed within the step budget."""


class LevelAccuracyError(NumericalError):
    """Level-set trace drifted off the level set beyond tolerance."""


class ResolutionError(NumericalError):
    """Requested sample count exceeds what the polyline density supports."""


class FitError(NumericalError):
    """Slope fit is impossible (too few points or nonpositive errors)."""


class ConfigError(Exception):
    """Run configuration file is malformed or inconsistent."""
