"""Exact Laurent polynomials and truncated power series in two variables.

Polynomials are elements of sympy's Puiseux ring over QQ with integer
exponents. Series live in the graded ring QQ[t, x, y], where each monomial
x^i y^j carries t^(i+j): truncating in t is truncation by total degree, so
the ``ring_series`` routines do the products, inverses and roots.
``precision=None`` marks an exact polynomial. Coefficients cross the API
as ``Fraction``.
"""

from __future__ import annotations

import logging
from collections.abc import Iterator, Mapping
from dataclasses import dataclass
from fractions import Fraction
from typing import Any

from sympy import QQ
from sympy.polys.puiseux import PuiseuxPoly, puiseux_ring
from sympy.polys.ring_series import rs_mul, rs_nth_root, rs_series_inversion, rs_trunc
from sympy.polys.rings import PolyElement, ring

from .arithmetic import format_rational, parse_rational
from .errors import DomainError, PrecisionExhausted

logger = logging.getLogger(__name__)

Monomial = tuple[int, int]
Scalar = Fraction | int

_INF = float("inf")

_LAURENT, _, _ = puiseux_ring("x, y", QQ)
_GRADED, _T, _, _ = ring("t, x, y", QQ)
# lex with y first: the leading term of a monic polynomial is y^d
_BY_Y, _, _ = ring("y, x", QQ)
_ORIGIN = (0, 0, 0)


def _qq(c: Scalar) -> Any:
    c = Fraction(c)
    return QQ(c.numerator, c.denominator)


def _fraction(c: Any) -> Fraction:
    return Fraction(int(c.numerator), int(c.denominator))


def _exponent(e: Any) -> int:
    return int(e.numerator) // int(e.denominator)


def _coerce_terms(terms: Mapping[Monomial, Scalar] | None) -> dict[Monomial, Fraction]:
    cleaned: dict[Monomial, Fraction] = {}
    for (i, j), c in (terms or {}).items():
        c = Fraction(c)
        if c:
            cleaned[(int(i), int(j))] = c
    return cleaned


def _format_monomial(i: int, j: int) -> str:
    parts = []
    if i:
        parts.append("x" if i == 1 else f"x^{i}")
    if j:
        parts.append("y" if j == 1 else f"y^{j}")
    return "*".join(parts)


def _format_terms(terms: Mapping[Monomial, Fraction], order: list[Monomial]) -> str:
    if not terms:
        return "0"
    out = []
    for m in order:
        c = terms[m]
        mono = _format_monomial(*m)
        sign = "-" if c < 0 else "+"
        mag = abs(c)
        if not mono:
            body = str(mag)
        elif mag == 1:
            body = mono
        else:
            body = f"{mag}*{mono}"
        out.append((sign, body))
    first_sign, first_body = out[0]
    text = ("-" if first_sign == "-" else "") + first_body
    for sign, body in out[1:]:
        text += f" {sign} {body}"
    return text


class LaurentBiPoly:
    """Finite sum of c * x^i * y^j with integer exponents and rational coefficients."""

    __slots__ = ("_p",)

    def __init__(self, terms: Mapping[Monomial, Scalar] | None = None):
        self._p: PuiseuxPoly = _LAURENT.from_dict(
            {m: _qq(c) for m, c in _coerce_terms(terms).items()}
        )
        self._validate()

    def _validate(self) -> None:
        pass

    @classmethod
    def _wrap(cls, p: PuiseuxPoly) -> LaurentBiPoly:
        obj = cls.__new__(cls)
        obj._p = p
        return obj

    @classmethod
    def monomial(cls, i: int, j: int, coefficient: Scalar = 1):
        return cls({(i, j): coefficient})

    @classmethod
    def constant(cls, c: Scalar):
        return cls({(0, 0): c})

    @classmethod
    def x(cls):
        return cls.monomial(1, 0)

    @classmethod
    def y(cls):
        return cls.monomial(0, 1)

    @property
    def terms(self) -> dict[Monomial, Fraction]:
        return {
            (_exponent(i), _exponent(j)): _fraction(c) for (i, j), c in self._p.iterterms()
        }

    def coefficient(self, i: int, j: int) -> Fraction:
        return self.terms.get((i, j), Fraction(0))

    def sorted_terms(self) -> list[tuple[Monomial, Fraction]]:
        """Terms in canonical order, lexicographic by (j, i)."""
        return sorted(self.terms.items(), key=lambda t: (t[0][1], t[0][0]))

    def __iter__(self) -> Iterator[tuple[Monomial, Fraction]]:
        return iter(self.sorted_terms())

    def __len__(self) -> int:
        return len(self._p)

    def __bool__(self) -> bool:
        return len(self._p) > 0

    @property
    def is_zero(self) -> bool:
        return len(self._p) == 0

    @property
    def degree_y(self) -> int:
        """Largest power of y present; -1 for the zero polynomial."""
        return max((j for _, j in self.terms), default=-1)

    def x_exponents(self) -> set[int]:
        return {i for i, _ in self.terms}

    def _result_type(self, other: Any) -> type[LaurentBiPoly]:
        if isinstance(self, BiPoly) and (
            isinstance(other, BiPoly) or not isinstance(other, LaurentBiPoly)
        ):
            return BiPoly
        return LaurentBiPoly

    def _coerce(self, other: Any) -> PuiseuxPoly | None:
        if isinstance(other, LaurentBiPoly):
            return other._p
        if isinstance(other, (int, Fraction)):
            return _LAURENT.ground_new(_qq(other))
        return None

    def __add__(self, other: Any):
        p = self._coerce(other)
        if p is None:
            return NotImplemented
        return self._result_type(other)._wrap(self._p + p)

    __radd__ = __add__

    def __sub__(self, other: Any):
        p = self._coerce(other)
        if p is None:
            return NotImplemented
        return self._result_type(other)._wrap(self._p - p)

    def __rsub__(self, other: Any):
        return (-self) + other

    def __neg__(self):
        return type(self)._wrap(-self._p)

    def __mul__(self, other: Any):
        p = self._coerce(other)
        if p is None:
            return NotImplemented
        return self._result_type(other)._wrap(self._p * p)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            if len(self._p) != 1:
                raise DomainError("only monomials have negative powers")
            return LaurentBiPoly._wrap(self._p**n)
        return type(self)._wrap(self._p**n)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, LaurentBiPoly):
            return self.terms == other.terms
        if isinstance(other, (int, Fraction)):
            return self.terms == _coerce_terms({(0, 0): other})
        return NotImplemented

    __hash__ = None  # type: ignore[assignment]

    def subs(self, x: Any, y: Any) -> Any:
        """Evaluate at x and y, which may be numbers, polynomials or series."""
        cache_x: dict[int, Any] = {}
        cache_y: dict[int, Any] = {}
        total = None
        for (i, j), c in self.terms.items():
            if i not in cache_x:
                cache_x[i] = x**i
            if j not in cache_y:
                cache_y[j] = y**j
            term = cache_x[i] * cache_y[j] * c
            total = term if total is None else total + term
        if total is None:
            return x * 0
        return total

    def to_poly(self) -> BiPoly:
        return BiPoly(self.terms)

    def __str__(self) -> str:
        terms = self.terms
        order = sorted(terms, key=lambda m: (-m[1], -m[0]))
        return _format_terms(terms, order)

    def __repr__(self) -> str:
        return f"{type(self).__name__}('{self}')"


class BiPoly(LaurentBiPoly):
    """Polynomial in x and y with rational coefficients."""

    __slots__ = ()

    def _validate(self) -> None:
        for i, j in self.terms:
            if i < 0 or j < 0:
                raise DomainError(f"negative exponent ({i}, {j}) in a polynomial")

    @classmethod
    def one(cls) -> BiPoly:
        return cls.constant(1)

    def coefficient_of_y(self, j: int) -> BiPoly:
        """The coefficient of y^j, a polynomial in x."""
        return BiPoly({(i, 0): c for (i, jj), c in self.terms.items() if jj == j})

    def leading_y(self) -> BiPoly:
        return self.coefficient_of_y(self.degree_y)

    @property
    def is_monic_in_y(self) -> bool:
        return not self.is_zero and self.leading_y() == 1


def _by_y(f: BiPoly) -> PolyElement:
    return _BY_Y.from_dict({(j, i): _qq(c) for (i, j), c in f.terms.items()})


def divide_monic_in_y(f: BiPoly, g: BiPoly) -> list[BiPoly]:
    """Expand f in powers of g: f = sum c_j g^j with deg_y c_j < deg_y g.

    Each digit is the remainder of sympy's division by g in the lex order
    that ranks y first.

    Raises:
        DomainError: If g is not monic as a polynomial in y
    """
    if not g.is_monic_in_y or g.degree_y < 1:
        raise DomainError(f"{g} is not monic of positive degree in y")
    divisor = _by_y(g)
    rest = _by_y(f)
    digits: list[BiPoly] = []
    while rest:
        rest, r = rest.div(divisor)
        digits.append(BiPoly({(i, j): _fraction(c) for (j, i), c in r.iterterms()}))
    return digits


def _graded(terms: Mapping[Monomial, Fraction], precision: int | None) -> PolyElement:
    return _GRADED.from_dict(
        {
            (i + j, i, j): _qq(c)
            for (i, j), c in terms.items()
            if precision is None or i + j < precision
        }
    )


def _truncated(p: PolyElement, precision: float) -> PolyElement:
    return p if precision == _INF else rs_trunc(p, _T, int(precision))


def _precision_bound(s: PowerSeries) -> float:
    return _INF if s.precision is None else s.precision


def _lowest_degree(s: PowerSeries) -> float:
    order = s.order
    return _precision_bound(s) if order is None else order


def _as_precision(p: float) -> int | None:
    return None if p == _INF else int(p)


class PowerSeries:
    """Power series in X and Y known below a total-degree truncation order.

    A series with nonzero constant term is a unit of the local ring; units
    stand for the cofactors, residues and roots that charts carry around.
    """

    __slots__ = ("_p", "precision")

    def __init__(
        self, terms: Mapping[Monomial, Scalar] | None = None, precision: int | None = None
    ):
        if precision is not None and precision < 0:
            raise DomainError("precision must be nonnegative")
        cleaned = _coerce_terms(terms)
        for i, j in cleaned:
            if i < 0 or j < 0:
                raise DomainError(f"negative exponent ({i}, {j}) in a power series")
        self._p: PolyElement = _graded(cleaned, precision)
        self.precision = precision

    @classmethod
    def _wrap(cls, p: PolyElement, precision: int | None) -> PowerSeries:
        obj = cls.__new__(cls)
        obj._p = p
        obj.precision = precision
        return obj

    @classmethod
    def constant(cls, c: Scalar, precision: int | None = None) -> PowerSeries:
        return cls({(0, 0): c}, precision)

    @classmethod
    def one(cls) -> PowerSeries:
        return cls.constant(1)

    @classmethod
    def from_poly(cls, f: LaurentBiPoly, precision: int | None = None) -> PowerSeries:
        return cls(f.terms, precision)

    @classmethod
    def X(cls) -> PowerSeries:
        return cls({(1, 0): 1})

    @classmethod
    def Y(cls) -> PowerSeries:
        return cls({(0, 1): 1})

    @property
    def terms(self) -> dict[Monomial, Fraction]:
        return {(i, j): _fraction(c) for (_, i, j), c in self._p.iterterms()}

    @property
    def is_exact(self) -> bool:
        return self.precision is None

    @property
    def order(self) -> int | None:
        """Lowest total degree among known nonzero terms."""
        return min((m[0] for m in self._p.itermonoms()), default=None)

    @property
    def constant_term(self) -> Fraction:
        if self.precision == 0:
            raise PrecisionExhausted("constant term lies beyond the truncation order")
        return _fraction(self._p.get(_ORIGIN, QQ.zero))

    @property
    def is_unit(self) -> bool:
        return self.constant_term != 0

    def coefficient(self, i: int, j: int) -> Fraction:
        if self.precision is not None and i + j >= self.precision:
            raise PrecisionExhausted(
                f"coefficient of X^{i}Y^{j} is beyond precision {self.precision}"
            )
        return _fraction(self._p.get((i + j, i, j), QQ.zero))

    def min_exponent(self, var: int) -> int | None:
        return min((m[var + 1] for m in self._p.itermonoms()), default=None)

    def known_zero(self) -> bool:
        return not self._p

    def to_poly(self) -> BiPoly:
        return BiPoly(self.terms)

    def with_precision(self, precision: int | None) -> PowerSeries:
        """Truncate to the given order (never raises the known order)."""
        if precision is None:
            return self
        new = precision if self.precision is None else min(self.precision, precision)
        return PowerSeries._wrap(rs_trunc(self._p, _T, new), new)

    def _coerce(self, other: Any) -> PowerSeries | None:
        if isinstance(other, PowerSeries):
            return other
        if isinstance(other, (int, Fraction)):
            return PowerSeries.constant(other)
        if isinstance(other, LaurentBiPoly):
            return PowerSeries.from_poly(other)
        return None

    def __add__(self, other: Any) -> PowerSeries:
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        p = min(_precision_bound(self), _precision_bound(o))
        return PowerSeries._wrap(_truncated(self._p + o._p, p), _as_precision(p))

    __radd__ = __add__

    def __neg__(self) -> PowerSeries:
        return PowerSeries._wrap(-self._p, self.precision)

    def __sub__(self, other: Any) -> PowerSeries:
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other: Any) -> PowerSeries:
        return (-self) + other

    def __mul__(self, other: Any) -> PowerSeries:
        if isinstance(other, (int, Fraction)):
            return PowerSeries._wrap(self._p * _qq(other), self.precision)
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        p = min(
            _precision_bound(self) + _lowest_degree(o),
            _precision_bound(o) + _lowest_degree(self),
        )
        if p == _INF:
            return PowerSeries._wrap(self._p * o._p, None)
        return PowerSeries._wrap(rs_mul(self._p, o._p, _T, int(p)), int(p))

    __rmul__ = __mul__

    def __truediv__(self, other: Any) -> PowerSeries:
        """Quotient by a unit, or the exact quotient of two exact series.

        Raises:
            DomainError: If the divisor is not a unit and does not divide exactly
            PrecisionExhausted: If an exact non-constant unit does not divide exactly
        """
        if isinstance(other, (int, Fraction)):
            return self * (1 / Fraction(other))
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if self.is_exact and o.is_exact and not o.known_zero():
            quotient, remainder = self._p.div(o._p)
            if not remainder:
                return PowerSeries._wrap(quotient, None)
        return self * o.reciprocal()

    def __pow__(self, n: int) -> PowerSeries:
        if n < 0:
            return self.reciprocal() ** (-n)
        if self.is_exact:
            return PowerSeries._wrap(self._p**n, None)
        result = PowerSeries.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def reciprocal(self) -> PowerSeries:
        """Inverse of a unit.

        Raises:
            DomainError: If the constant term is zero
            PrecisionExhausted: If the unit is exact but not constant
        """
        c = self.constant_term
        if not c:
            raise DomainError("series with zero constant term is not invertible")
        if len(self._p) == 1:
            return PowerSeries.constant(1 / c, self.precision)
        if self.precision is None:
            raise PrecisionExhausted("inverting a non-constant exact unit needs a truncation order")
        inverse = rs_series_inversion(self._p, _T, self.precision)
        return PowerSeries._wrap(rs_trunc(inverse, _T, self.precision), self.precision)

    def power(self, exponent: Fraction | int) -> PowerSeries:
        """Binomial series (1 + h)^e of a unit with constant term 1.

        A fractional exponent a/b takes sympy's b-th root and raises it to a.
        """
        exponent = Fraction(exponent)
        if self.constant_term != 1:
            raise DomainError("binomial powers need constant term 1")
        if exponent.denominator == 1:
            return self ** int(exponent)
        if len(self._p) == 1:
            return PowerSeries.constant(1, self.precision)
        if self.precision is None:
            raise PrecisionExhausted(
                "a fractional power of a non-constant unit needs a truncation order"
            )
        root = rs_nth_root(self._p, exponent.denominator, _T, self.precision)
        root = PowerSeries._wrap(rs_trunc(root, _T, self.precision), self.precision)
        return root**exponent.numerator

    def shift(self, i: int, j: int) -> PowerSeries:
        """Multiply by X^i Y^j."""
        if i < 0 or j < 0:
            return self.divide_monomial(-min(i, 0), -min(j, 0)).shift(max(i, 0), max(j, 0))
        p = None if self.precision is None else self.precision + i + j
        return PowerSeries._wrap(self._p.mul_monom((i + j, i, j)), p)

    def divide_monomial(self, i: int, j: int) -> PowerSeries:
        """Divide by X^i Y^j; every known term must be divisible."""
        terms = self.terms
        for a, b in terms:
            if a < i or b < j:
                raise DomainError(f"X^{i}Y^{j} does not divide the series")
        p = None if self.precision is None else max(self.precision - i - j, 0)
        return PowerSeries({(a - i, b - j): c for (a, b), c in terms.items()}, p)

    def compose(self, xs: PowerSeries, ys: PowerSeries) -> PowerSeries:
        """Substitute X -> xs and Y -> ys, both without constant term."""
        for s in (xs, ys):
            if not s.known_zero() and s.order == 0:
                raise DomainError("substituted series must vanish at the origin")
        low = min(_lowest_degree(xs), _lowest_degree(ys))
        p = _as_precision(_INF if self.precision is None else self.precision * low)
        px: list[PowerSeries] = [PowerSeries.one()]
        py: list[PowerSeries] = [PowerSeries.one()]
        total = PowerSeries._wrap(_GRADED.zero, p)
        for (i, j), c in sorted(self.terms.items()):
            while len(px) <= i:
                px.append((px[-1] * xs).with_precision(p))
            while len(py) <= j:
                py.append((py[-1] * ys).with_precision(p))
            total = total + (px[i] * py[j]).with_precision(p) * c
        return total

    def agrees_with(self, other: PowerSeries) -> bool:
        """Equality of every coefficient known on both sides."""
        return (self - other).known_zero()

    def __eq__(self, other: object) -> bool:
        if isinstance(other, PowerSeries):
            return self.precision == other.precision and self._p == other._p
        return NotImplemented

    __hash__ = None  # type: ignore[assignment]

    def __str__(self) -> str:
        terms = self.terms
        order = sorted(terms, key=lambda m: (m[0] + m[1], m[1]))
        text = _format_terms(terms, order).replace("x", "X").replace("y", "Y")
        if self.precision is None:
            return text
        return f"{text} + O({self.precision})"

    def __repr__(self) -> str:
        return f"PowerSeries('{self}')"


def unit_root(delta: PowerSeries, t: int) -> PowerSeries:
    """The t-th root of a unit with constant term 1, as a binomial series.

    Raises:
        DomainError: If t < 1 or the constant term is not 1
        PrecisionExhausted: If delta is an exact non-constant unit
    """
    if t < 1:
        raise DomainError(f"root index must be positive, got {t}")
    if delta.constant_term != 1:
        raise DomainError("unit root needs constant term 1; rescale the unit first")
    if t == 1:
        return delta
    return delta.power(Fraction(1, t))


def residue(g: PowerSeries | LaurentBiPoly) -> Fraction:
    """The residue (constant term) of a unit.

    Raises:
        DomainError: If the input is not a unit
    """
    c = g.coefficient(0, 0) if isinstance(g, LaurentBiPoly) else g.constant_term
    if not c:
        raise DomainError(f"{g} is not a unit")
    return c


@dataclass(frozen=True)
class SubstitutionMap:
    """Base coordinates (x, y) written in chart coordinates (X, Y).

    Each image is a monomial X^a Y^b times a unit series.
    """

    x_image: tuple[Monomial, PowerSeries]
    y_image: tuple[Monomial, PowerSeries]

    def __post_init__(self):
        for name, (mono, unit) in (("x", self.x_image), ("y", self.y_image)):
            if mono[0] < 0 or mono[1] < 0:
                raise DomainError(f"{name} image has a negative exponent")
            if not unit.is_unit:
                raise DomainError(f"{name} image cofactor is not a unit")

    @classmethod
    def identity(cls) -> SubstitutionMap:
        return cls(((1, 0), PowerSeries.one()), ((0, 1), PowerSeries.one()))

    @classmethod
    def composite_chart(cls, p: int, q: int, a: int, b: int, c: Fraction) -> SubstitutionMap:
        """x = X^q (Y+c)^b, y = X^p (Y+c)^a."""
        shifted = PowerSeries({(0, 0): c, (0, 1): 1})
        return cls(((q, 0), shifted**b), ((p, 0), shifted**a))

    @property
    def precision(self) -> int | None:
        ps = [u.precision for _, u in (self.x_image, self.y_image) if u.precision is not None]
        return min(ps) if ps else None

    def image(self, which: int) -> PowerSeries:
        mono, unit = self.x_image if which == 0 else self.y_image
        return unit.shift(*mono)

    def with_precision(self, precision: int | None) -> SubstitutionMap:
        """The same map with both units truncated to the given order."""
        (xm, xu), (ym, yu) = self.x_image, self.y_image
        return SubstitutionMap(
            (xm, xu.with_precision(precision)), (ym, yu.with_precision(precision))
        )

    def compose(self, step: SubstitutionMap) -> SubstitutionMap:
        """Follow this map with a change of chart coordinates.

        ``step`` writes the current chart coordinates in terms of new ones.
        """
        xs, ys = step.image(0), step.image(1)
        (sx, ux), (sy, uy) = step.x_image, step.y_image
        images = []
        for (m1, m2), unit in (self.x_image, self.y_image):
            mono = (m1 * sx[0] + m2 * sy[0], m1 * sx[1] + m2 * sy[1])
            images.append((mono, ux**m1 * uy**m2 * unit.compose(xs, ys)))
        return SubstitutionMap(images[0], images[1])

    def agrees_with(self, other: SubstitutionMap) -> bool:
        return all(
            m1 == m2 and u1.agrees_with(u2)
            for (m1, u1), (m2, u2) in (
                (self.x_image, other.x_image),
                (self.y_image, other.y_image),
            )
        )


@dataclass(frozen=True)
class Pullback:
    """A pulled-back function written as X^order[0] Y^order[1] times a series."""

    order: Monomial
    remainder: PowerSeries

    def series(self) -> PowerSeries:
        return self.remainder.shift(*self.order)


def _cached_power(cache: dict[int, PowerSeries], unit: PowerSeries, n: int) -> PowerSeries:
    if n not in cache:
        cache[n] = unit**n
    return cache[n]


def substitute(f: LaurentBiPoly, smap: SubstitutionMap) -> Pullback:
    """Pull f back through a chart map.

    Monomial exponents are tracked exactly; only the unit tails are
    truncated. The common monomial factor is split off as ``order``. For a
    term x^i y^j the units with negative exponent are collected into one
    denominator, so u_x^i u_y^j is an exact quotient whenever one exists
    and a unit is inverted as a series only otherwise.

    Args:
        f: Polynomial in the base coordinates, negative exponents allowed
        smap: Chart map writing x and y as monomials times units

    Returns:
        Pullback of f as X^a Y^b times a series

    Raises:
        PrecisionExhausted: If a quotient of exact units is not a polynomial
    """
    if f.is_zero:
        return Pullback((0, 0), PowerSeries())
    (xm, xu), (ym, yu) = smap.x_image, smap.y_image
    terms = f.terms
    exps = {(i, j): (i * xm[0] + j * ym[0], i * xm[1] + j * ym[1]) for (i, j) in terms}
    low = (min(e[0] for e in exps.values()), min(e[1] for e in exps.values()))
    powers_x: dict[int, PowerSeries] = {}
    powers_y: dict[int, PowerSeries] = {}
    total: PowerSeries | None = None
    for (i, j), c in terms.items():
        num = _cached_power(powers_x, xu, max(i, 0)) * _cached_power(powers_y, yu, max(j, 0))
        den = _cached_power(powers_x, xu, max(-i, 0)) * _cached_power(powers_y, yu, max(-j, 0))
        e = exps[(i, j)]
        term = (num / den * c).shift(e[0] - low[0], e[1] - low[1])
        total = term if total is None else total + term
    return Pullback(low, total)


def factor_exceptional(g: Pullback, var: str = "X") -> tuple[int, PowerSeries, bool]:
    """Divide out the largest power of one chart coordinate.

    Returns:
        (order, cofactor, is_unit) where is_unit means the cofactor has a
        nonzero constant term

    Raises:
        DomainError: If the pulled-back function is exactly zero
        PrecisionExhausted: If no coefficient is known to be nonzero
    """
    if var not in ("X", "Y"):
        raise DomainError(f"unknown chart coordinate {var!r}")
    rem = g.remainder
    if rem.known_zero():
        if rem.is_exact:
            raise DomainError("cannot factor the zero function")
        raise PrecisionExhausted("every known coefficient vanishes below the truncation order")
    k = 0 if var == "X" else 1
    e = rem.min_exponent(k)
    other = g.order[1 - k]
    if other < 0:
        raise DomainError("pulled-back function has a pole along the other coordinate")
    div = (e, 0) if k == 0 else (0, e)
    cofactor = rem.divide_monomial(*div)
    cofactor = cofactor.shift(other, 0) if k == 1 else cofactor.shift(0, other)
    order = g.order[k] + e
    return order, cofactor, cofactor.precision != 0 and cofactor.constant_term != 0


def poly_to_json(f: LaurentBiPoly) -> dict:
    """Encode as {"terms": [[i, j, "num/den"], ...]} sorted by (j, i)."""
    return {"terms": [[i, j, format_rational(c)] for (i, j), c in f.sorted_terms()]}


def poly_from_json(data: Mapping[str, Any]) -> BiPoly:
    """Decode the polynomial encoding produced by ``poly_to_json``.

    Raises:
        DomainError: If the encoding is malformed
    """
    try:
        raw = data["terms"]
        terms: dict[Monomial, Fraction] = {}
        for i, j, c in raw:
            if not isinstance(i, int) or not isinstance(j, int):
                raise DomainError(f"exponents must be integers, got {i!r}, {j!r}")
            terms[(i, j)] = terms.get((i, j), Fraction(0)) + parse_rational(c)
    except (KeyError, TypeError, ValueError) as e:
        if isinstance(e, DomainError):
            raise
        raise DomainError(f"malformed polynomial encoding: {e}") from e
    return BiPoly(terms)
