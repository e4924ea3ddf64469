"""Tests for data models."""

from fractions import Fraction

import pytest

from jumping.errors import DomainError
from jumping.models import (
    Chart,
    CriterionFailure,
    CriterionReport,
    Expansion,
    ExpansionTerm,
    ValuationSpec,
    ValueGroupLevel,
)


class TestValuationSpec:
    """Tests for ValuationSpec validation and slicing."""

    def test_coerces(self):
        """Pairs, lambdas and mu are coerced to exact types."""
        spec = ValuationSpec([[5, 3], [1, 2]], [1, Fraction(1, 2)], 2)
        assert spec.pairs == ((5, 3), (1, 2))
        assert spec.lambdas == (Fraction(1), Fraction(1, 2))
        assert spec.mu == Fraction(2)
        assert spec.length == 2
        assert spec.ps == (5, 1)
        assert spec.qs == (3, 2)

    def test_truncated_and_tail(self, spec_53_12):
        """Truncation keeps a prefix, tail keeps the rest with a new mu."""
        assert spec_53_12.truncated(1).pairs == ((5, 3),)
        tail = spec_53_12.tail(1, Fraction(1, 3))
        assert tail.pairs == ((1, 2),)
        assert tail.mu == Fraction(1, 3)

    @pytest.mark.parametrize(
        "pairs,lambdas,mu,message",
        [
            (((5, 3),), (), 1, "lambdas"),
            (((0, 3),), (1,), 1, "positive"),
            (((4, 2),), (1,), 1, "coprime"),
            (((5, 3),), (0,), 1, "nonzero"),
            (((5, 3),), (1,), 0, "mu"),
        ],
    )
    def test_rejects(self, pairs, lambdas, mu, message):
        """Malformed specs raise DomainError naming the problem."""
        with pytest.raises(DomainError) as exc_info:
            ValuationSpec(pairs, lambdas, mu)
        assert message in str(exc_info.value)


class TestValueGroupLevel:
    """Tests for ValueGroupLevel validation."""

    def test_qk(self):
        """Q_k is the product of the q_i."""
        level = ValueGroupLevel(2, (1, Fraction(5, 3), Fraction(31, 6)), (3, 2))
        assert level.Qk == 6

    def test_counts(self):
        """The generator and exponent counts must match the level."""
        with pytest.raises(DomainError):
            ValueGroupLevel(1, (1,), (3,))

    def test_not_integral(self):
        """Q_k beta_k must be integral."""
        with pytest.raises(DomainError) as exc_info:
            ValueGroupLevel(1, (1, Fraction(1, 2)), (3,))
        assert "not an integer" in str(exc_info.value)


class TestJumpingSequence:
    """Tests for JumpingSequence accessors."""

    def test_accessors(self, seq_53_12):
        """Level, values and relation rows read off the sequence."""
        assert seq_53_12.level == 2
        assert seq_53_12.value(2) == Fraction(31, 6)
        assert seq_53_12.row(2) == (7, 2)
        assert seq_53_12.level_data(1).Qk == 3


class TestReports:
    """Tests for small report records."""

    def test_criterion_truthiness(self):
        """A report is truthy exactly when nothing failed."""
        assert CriterionReport(gammas=())
        failed = CriterionReport(gammas=(), failures=(CriterionFailure(2, 1, "q too small"),))
        assert not failed
        assert failed.failed_conditions() == {2}

    def test_expansion_minimum(self):
        """The minimum value and its terms are reported."""
        terms = (
            ExpansionTerm((0, 3), Fraction(1), Fraction(5)),
            ExpansionTerm((5, 0), Fraction(-1), Fraction(5)),
            ExpansionTerm((6, 0), Fraction(1), Fraction(6)),
        )
        expansion = Expansion(1, terms)
        assert expansion.min_value == 5
        assert len(expansion.minimal_terms()) == 2
        assert Expansion(1, ()).min_value is None

    @pytest.mark.parametrize(
        "exceptional,free,is_x",
        [((True, False), True, True), ((False, True), True, False), ((True, True), False, None)],
    )
    def test_chart_free(self, exceptional, free, is_x):
        """A chart is free when exactly one coordinate is exceptional."""
        chart = Chart(depth=1, values=(Fraction(1), Fraction(2)), exceptional=exceptional)
        assert chart.free is free
        assert chart.exceptional_is_x is is_x


class TestChart:
    """Tests for Chart validation."""

    @pytest.mark.parametrize(
        "values",
        [
            (Fraction(0), Fraction(1)),
            (Fraction(-1), None),
            (Fraction(1), Fraction(0)),
            (Fraction(2), Fraction(-1, 3)),
        ],
    )
    def test_rejects_nonpositive_values(self, values):
        """A coordinate in the maximal ideal has positive value."""
        with pytest.raises(DomainError) as exc_info:
            Chart(depth=0, values=values, exceptional=(True, False))
        assert "positive values" in str(exc_info.value)

    def test_unknown_second_value(self):
        """The second value may be unknown past the last level."""
        chart = Chart(depth=3, values=(Fraction(1, 6), None), exceptional=(True, False))
        assert chart.values[1] is None
