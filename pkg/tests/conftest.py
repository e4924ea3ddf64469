"""Shared test fixtures for jumping-polynomials tests."""

from fractions import Fraction

import pytest

from jumping.models import ValuationSpec
from jumping.sequence import build_sequence


@pytest.fixture
def spec_53():
    """One level: v(y) = 5/3."""
    return ValuationSpec(((5, 3),), (Fraction(1),))


@pytest.fixture
def spec_53_12():
    """Two levels with beta = (1, 5/3, 31/6), the worked example used throughout."""
    return ValuationSpec(((5, 3), (1, 2)), (Fraction(1), Fraction(1)))


@pytest.fixture
def seq_53_12(spec_53_12):
    """Jumping polynomials T_0..T_3 of the worked example."""
    return build_sequence(spec_53_12)


@pytest.fixture
def spec_51_12():
    """First level with q = 1, so the first independent index is 2."""
    return ValuationSpec(((5, 1), (1, 2)), (Fraction(1), Fraction(1)))


@pytest.fixture
def spec_even():
    """Every p_i even, so t = 2 transfers without obstruction."""
    return ValuationSpec(((4, 3), (2, 5)), (Fraction(1), Fraction(1)))


@pytest.fixture
def spec_43_32():
    """t = 2 is obstructed at level 2, t = 6 at level 1."""
    return ValuationSpec(((4, 3), (3, 2)), (Fraction(1), Fraction(1)))
