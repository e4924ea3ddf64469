"""jumping-polynomials: generating sequences, quadratic transforms and monomialization."""

from fractions import Fraction

from .arithmetic import parse_rational
from .errors import (
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
from .models import (
    Classification,
    DescentReport,
    ExtensionState,
    JumpingSequence,
    ToroidalCertificate,
    TransformTrace,
    ValuationCase,
    ValuationSpec,
    ValueGroupLevel,
)
from .monomialization import descend, extension_state
from .poly import BiPoly, PowerSeries
from .sequence import build_sequence, classify, independent_subsequence, value, verify_spivakovsky
from .transforms import checkpoint_precision, pullback_value_oracle, run_to_level

__version__ = "0.1.0"

__all__ = [
    "BiPoly",
    "PowerSeries",
    "ValuationSpec",
    "ValueGroupLevel",
    "JumpingSequence",
    "TransformTrace",
    "ExtensionState",
    "DescentReport",
    "ToroidalCertificate",
    "Classification",
    "ValuationCase",
    "JumpingError",
    "DomainError",
    "UnitRootNotRational",
    "PrecisionExhausted",
    "LevelBoundExceeded",
    "StepBoundExceeded",
    "VerificationFailed",
    "ResidueMismatch",
    "NonFreeChart",
    "ObstructionPresent",
    "build_sequence",
    "classify",
    "independent_subsequence",
    "verify_spivakovsky",
    "value",
    "run_to_level",
    "checkpoint_precision",
    "pullback_value_oracle",
    "extension_state",
    "descend",
    "build",
]


def build(
    pairs: list[tuple[int, int]],
    lambdas: list[Fraction | int | str],
    mu: Fraction | int = 1,
    level: int | None = None,
) -> JumpingSequence:
    """Build the jumping polynomials of a valuation in one call.

    Args:
        pairs: Coprime positive pairs (p_i, q_i)
        lambdas: Nonzero residues lambda_i; strings such as "3/2" are accepted
        mu: Value of x
        level: Build T_0..T_{level+1}. Defaults to every level given

    Returns:
        JumpingSequence instance

    Raises:
        DomainError: If the data does not define a valuation
    """
    spec = ValuationSpec(tuple(pairs), tuple(parse_rational(c) for c in lambdas), Fraction(mu))
    return build_sequence(spec, level)
