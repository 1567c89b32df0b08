"""Exception hierarchy shared by all modules.

The CLI maps these onto process exit codes: configuration problems exit
with 2, violated preconditions with 3, numerical failures with 4.
"""


class NeugradError(Exception):
    """Base class for all library errors."""


class ConfigError(NeugradError):
    """Malformed or inconsistent experiment configuration."""


class InvalidInputError(NeugradError):
    """Input outside the operation's domain (non-finite, off-boundary, ...)."""


class PreconditionError(NeugradError):
    """A documented precondition of an operation was violated."""


class StabilityError(PreconditionError):
    """Explicit step would overshoot: dt * penalty exceeds the stability guard."""


class CorruptedStateError(PreconditionError):
    """Simulation state violates a scheme invariant (e.g. position left the domain)."""


class DegenerateDataError(NeugradError):
    """Estimated quantity carries no information (e.g. all-zero moments)."""


class NumericalError(NeugradError):
    """A numerical subroutine failed to converge or produced non-finite output."""
