"""Tests for error handling."""

import pytest

import jumping
from jumping.errors import (
    DomainError,
    JumpingError,
    LevelBoundExceeded,
    NonFreeChart,
    ObstructionPresent,
    PrecisionExhausted,
    ResidueMismatch,
    StepBoundExceeded,
    UnitRootNotRational,
    VerificationFailed,
)


class TestExitCodes:
    """Each error class carries the exit code the CLI uses."""

    @pytest.mark.parametrize(
        "cls,code",
        [
            (DomainError, 1),
            (UnitRootNotRational, 1),
            (VerificationFailed, 2),
            (ResidueMismatch, 2),
            (NonFreeChart, 2),
            (PrecisionExhausted, 3),
            (LevelBoundExceeded, 3),
            (StepBoundExceeded, 3),
        ],
    )
    def test_codes(self, cls, code):
        """Each error class carries its exit code."""
        assert cls("boom").exit_code == code

    def test_obstruction(self):
        """ObstructionPresent keeps the level and the exponent."""
        exc = ObstructionPresent(3, 2)
        assert exc.exit_code == 2
        assert (exc.M, exc.t) == (3, 2)
        assert "p_3" in exc.message


class TestHierarchy:
    """Errors can be caught as library errors or as the matching builtin."""

    def test_builtin_bases(self):
        """Errors can be caught as the matching builtins."""
        assert issubclass(DomainError, ValueError)
        assert issubclass(PrecisionExhausted, ArithmeticError)
        assert issubclass(ResidueMismatch, VerificationFailed)

    def test_to_dict(self):
        """to_dict names the class, message and reference."""
        exc = VerificationFailed("T_1 fails", reference="T_j = x_i^(Q_i*beta_j) * unit")
        assert exc.to_dict() == {
            "error": "VerificationFailed",
            "message": "T_1 fails",
            "reference": "T_j = x_i^(Q_i*beta_j) * unit",
        }

    def test_build_rejects_bad_data(self):
        """build surfaces spec validation errors."""
        with pytest.raises(JumpingError) as exc_info:
            jumping.build([(2, 4)], [1])
        assert "coprime" in str(exc_info.value)

    def test_build_rejects_float_lambda(self):
        """Float lambdas are refused."""
        with pytest.raises(DomainError):
            jumping.build([(5, 3)], [0.5])
