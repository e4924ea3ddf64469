"""Tests for polynomials, truncated series and chart substitution."""

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jumping.errors import DomainError, PrecisionExhausted
from jumping.poly import (
    BiPoly,
    LaurentBiPoly,
    PowerSeries,
    Pullback,
    SubstitutionMap,
    divide_monic_in_y,
    factor_exceptional,
    poly_from_json,
    poly_to_json,
    residue,
    substitute,
    unit_root,
)

x, y = BiPoly.x(), BiPoly.y()

_bipolys = st.dictionaries(
    st.tuples(st.integers(0, 3), st.integers(0, 3)),
    st.fractions(min_value=-3, max_value=3, max_denominator=4),
    max_size=4,
).map(BiPoly)


class TestBiPoly:
    """Tests for polynomial arithmetic."""

    def test_cancellation(self):
        """Adding back a removed term restores the polynomial."""
        assert (y**3 - x**5) + x**5 == y**3

    def test_laurent_inverse(self):
        """Negative powers of monomials cancel exactly."""
        assert LaurentBiPoly.monomial(-5, 0) * x**5 == 1

    def test_negative_exponent_rejected(self):
        """Polynomials cannot carry negative exponents."""
        with pytest.raises(DomainError):
            BiPoly({(-1, 0): 1})

    def test_monic_and_degree(self):
        """T_2 of the worked example is monic of y-degree 3."""
        f = y**3 - x**5
        assert f.degree_y == 3
        assert f.is_monic_in_y
        assert not (y * 2).is_monic_in_y

    def test_subs_polynomials(self):
        """Substituting x^2 for x doubles every x-exponent."""
        f = y**3 - x**5
        assert f.subs(x**2, y) == y**3 - x**10


class TestDivideMonicInY:
    """Tests for expansion in powers of a monic polynomial."""

    def test_remainder_and_quotient(self):
        """f = g * 1 + x^7 y gives digits [x^7 y, 1]."""
        g = y**3 - x**5 * 2
        f = g + x**7 * y
        assert divide_monic_in_y(f, g) == [x**7 * y, 1]

    def test_perfect_power(self):
        """g^2 has digits [0, 0, 1] in base g."""
        g = y**3 - x**5
        assert divide_monic_in_y(g**2, g) == [0, 0, 1]

    def test_lower_degree_digits(self):
        """y^4 = y (y^3 - x^5) + x^5 y."""
        assert divide_monic_in_y(y**4, y**3 - x**5) == [x**5 * y, y]

    def test_not_monic(self):
        """The divisor must be monic in y."""
        with pytest.raises(DomainError):
            divide_monic_in_y(y**2, y * 2)


class TestPowerSeries:
    """Tests for truncated series."""

    def test_square_below_truncation(self):
        """(1 + Y)^2 is exact below order 4."""
        s = PowerSeries({(0, 0): 1, (0, 1): 1}, 4)
        assert s**2 == PowerSeries({(0, 0): 1, (0, 1): 2, (0, 2): 1}, 4)

    def test_reciprocal(self):
        """1 / (1 + X) = 1 - X + X^2 below order 3."""
        s = PowerSeries({(0, 0): 1, (1, 0): 1}, 3)
        assert s.reciprocal() == PowerSeries({(0, 0): 1, (1, 0): -1, (2, 0): 1}, 3)

    def test_exact_reciprocal_needs_precision(self):
        """An exact non-constant unit has no finite inverse."""
        with pytest.raises(PrecisionExhausted):
            PowerSeries({(0, 0): 1, (1, 0): 1}).reciprocal()

    def test_coefficient_beyond_precision(self):
        """Coefficients past the truncation order are unknown."""
        with pytest.raises(PrecisionExhausted):
            PowerSeries({(0, 0): 1}, 2).coefficient(1, 1)

    def test_compose(self):
        """(1 + X)(X -> 2X) = 1 + 2X."""
        s = PowerSeries({(0, 0): 1, (1, 0): 1})
        expected = PowerSeries({(0, 0): 1, (1, 0): 2})
        assert s.compose(PowerSeries.X() * 2, PowerSeries.Y()) == expected

    def test_compose_needs_vanishing_images(self):
        """Composition needs images without constant term."""
        with pytest.raises(DomainError):
            PowerSeries.X().compose(PowerSeries.one(), PowerSeries.Y())

    def test_exact_quotient(self):
        """Exact series divide without truncation when the quotient is a polynomial."""
        s = PowerSeries({(0, 0): 1, (0, 1): 1})
        quotient = s**3 / s
        assert quotient == s**2
        assert quotient.is_exact

    def test_inexact_quotient_needs_precision(self):
        """1 / (1 + X) has no exact form."""
        with pytest.raises(PrecisionExhausted):
            PowerSeries.one() / PowerSeries({(0, 0): 1, (1, 0): 1})

    def test_fractional_power(self):
        """((1 + X)^(3/2))^2 = (1 + X)^3 below the truncation order."""
        s = PowerSeries({(0, 0): 1, (1, 0): 1}, 6)
        assert (s.power(Fraction(3, 2)) ** 2).agrees_with(s**3)


class TestUnitRoot:
    """Tests for unit_root."""

    def test_square_root_binomial(self):
        """sqrt(1 + Y) = 1 + Y/2 - Y^2/8 + ..."""
        delta = PowerSeries({(0, 0): 1, (0, 1): 1}, 3)
        root = unit_root(delta, 2)
        assert root.coefficient(0, 1) == Fraction(1, 2)
        assert root.coefficient(0, 2) == Fraction(-1, 8)
        assert (root**2).agrees_with(delta)

    def test_exact_cube_root(self):
        """The cube root of (1 + X)^3 is 1 + X."""
        delta = PowerSeries({(0, 0): 1, (1, 0): 1}, 4) ** 3
        assert unit_root(delta, 3).agrees_with(PowerSeries({(0, 0): 1, (1, 0): 1}))

    @pytest.mark.parametrize("t", [1, 2, 5])
    def test_one(self, t):
        """Every root of 1 is 1."""
        assert unit_root(PowerSeries.one(), t) == PowerSeries.one()

    def test_constant_must_be_one(self):
        """Roots are taken of units with constant term 1."""
        with pytest.raises(DomainError):
            unit_root(PowerSeries.constant(4, 3), 2)


class TestResidue:
    """Tests for residue."""

    def test_polynomial_unit(self):
        """The residue of a polynomial unit is its constant term."""
        assert residue(BiPoly({(0, 0): 1, (1, 0): 1, (1, 1): 1})) == 1

    def test_shifted_power(self):
        """(3 + Y)^4 has residue 81."""
        assert residue(PowerSeries({(0, 0): 3, (0, 1): 1}) ** 4) == 81

    def test_non_unit(self):
        """Non-units have no residue."""
        with pytest.raises(DomainError):
            residue(x)


class TestSubstitution:
    """Tests for chart maps and exceptional factorization."""

    def test_x_in_composite_chart(self):
        """x = X^3 (Y + c) in the chart of (5, 3)."""
        smap = SubstitutionMap.composite_chart(5, 3, 2, 1, Fraction(1))
        pb = substitute(x, smap)
        assert pb.order == (3, 0)
        assert pb.remainder == PowerSeries({(0, 0): 1, (0, 1): 1})

    def test_y_pulls_back_to_unit(self):
        """y = X^5 (Y + c)^2 has X-order p_1 and a unit cofactor."""
        smap = SubstitutionMap.composite_chart(5, 3, 2, 1, Fraction(1))
        order, _, unit = factor_exceptional(substitute(y, smap), "X")
        assert (order, unit) == (5, True)

    def test_constant_fixed(self):
        """Constants pull back to themselves."""
        pb = substitute(BiPoly.one(), SubstitutionMap.identity())
        assert pb.order == (0, 0)
        assert pb.remainder == PowerSeries.one()

    def test_factor_unit(self):
        """A unit cofactor is reported as such."""
        cof = PowerSeries({(0, 0): 1, (0, 1): 1})
        assert factor_exceptional(Pullback((7, 0), cof)) == (7, cof, True)

    def test_factor_non_unit(self):
        """A cofactor vanishing at the origin is not a unit."""
        cof = PowerSeries({(0, 1): 1, (1, 1): 1})
        order, cofactor, unit = factor_exceptional(Pullback((2, 0), cof))
        assert (order, unit) == (2, False)
        assert cofactor == cof

    def test_factor_zero(self):
        """Zero has no exceptional order."""
        with pytest.raises(DomainError):
            factor_exceptional(Pullback((0, 0), PowerSeries()))

    def test_identity_compose(self):
        """The identity map is neutral for composition."""
        step = SubstitutionMap.composite_chart(1, 2, 1, 1, Fraction(3))
        assert SubstitutionMap.identity().compose(step).agrees_with(step)

    def test_laurent_monomial_is_exact(self):
        """y^3 / x^5 pulls back to exactly Y + c; the units cancel."""
        smap = SubstitutionMap.composite_chart(5, 3, 2, 1, Fraction(2))
        pb = substitute(LaurentBiPoly({(-5, 3): 1}), smap)
        assert pb.series() == PowerSeries({(0, 0): 2, (0, 1): 1})
        assert pb.series().is_exact

    def test_exceptional_parameter(self):
        """x^2 / y pulls back to X in the chart of (5, 3)."""
        smap = SubstitutionMap.composite_chart(5, 3, 2, 1, Fraction(2))
        assert substitute(LaurentBiPoly({(2, -1): 1}), smap).series() == PowerSeries.X()

    @settings(max_examples=50, deadline=None)
    @given(_bipolys, _bipolys, st.sampled_from([Fraction(1), Fraction(-2), Fraction(1, 3)]))
    def test_ring_homomorphism(self, f, g, c):
        """Pulling back respects sums and products."""
        smap = SubstitutionMap.composite_chart(5, 3, 2, 1, c)
        sf, sg = substitute(f, smap).series(), substitute(g, smap).series()
        assert substitute(f * g, smap).series() == sf * sg
        assert substitute(f + g, smap).series() == sf + sg


class TestPolyJson:
    """Tests for the polynomial JSON encoding."""

    def test_decode(self):
        """Terms decode from [i, j, "num/den"] triples."""
        data = {"terms": [[0, 3, "1"], [5, 0, "-1"]]}
        assert poly_from_json(data) == y**3 - x**5

    def test_encode_order(self):
        """Terms are sorted by the power of y, then of x."""
        assert poly_to_json(y**3 - x**5 + x * y) == {
            "terms": [[5, 0, "-1/1"], [1, 1, "1/1"], [0, 3, "1/1"]]
        }

    @pytest.mark.parametrize(
        "data",
        [
            {"terms": [[0, "a", "1"]]},
            {"terms": [[0, 1, 1.5]]},
            {"coefficients": []},
            {"terms": [[1]]},
        ],
    )
    def test_malformed(self, data):
        """Malformed term lists raise DomainError."""
        with pytest.raises(DomainError):
            poly_from_json(data)
