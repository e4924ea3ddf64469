"""Exceptions raised by jumping-polynomials.

Every error carries a message and, for verification failures, a
``reference`` naming the identity that did not hold. The CLI maps each
class to an exit code through ``exit_code``.
"""


class JumpingError(Exception):
    """Base class for all library errors."""

    exit_code = 1

    def __init__(self, message: str, reference: str | None = None):
        super().__init__(message)
        self.message = message
        self.reference = reference

    def to_dict(self) -> dict:
        """Structured form written to stderr by the CLI."""
        return {
            "error": type(self).__name__,
            "message": self.message,
            "reference": self.reference,
        }


class DomainError(JumpingError, ValueError):
    """An input lies outside the domain of an operation."""


class UnitRootNotRational(DomainError):
    """The constant of a unit has no t-th root in the rationals."""


class PrecisionExhausted(JumpingError, ArithmeticError):
    """A needed coefficient lies beyond the truncation order of a series."""

    exit_code = 3


class LevelBoundExceeded(JumpingError):
    """A value could not be certified within the allowed number of levels."""

    exit_code = 3


class StepBoundExceeded(JumpingError):
    """The descent did not finish within the allowed number of iterations."""

    exit_code = 3


class VerificationFailed(JumpingError):
    """A checked identity does not hold."""

    exit_code = 2


class ResidueMismatch(VerificationFailed):
    """A residue computed in a chart differs from the expected constant."""


class NonFreeChart(VerificationFailed):
    """An operation needing permissible parameters was given a non-free chart."""


class ObstructionPresent(JumpingError):
    """The exponent t does not divide p_M, so the sequence cannot be transferred."""

    exit_code = 2

    def __init__(self, M: int, t: int):
        super().__init__(
            f"t = {t} does not divide p_{M}; transfer is obstructed at level {M}",
            reference="t | d_k",
        )
        self.M = M
        self.t = t
