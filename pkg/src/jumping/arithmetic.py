"""Exact arithmetic on values: Z-divisibility, value-group levels, Euclid data.

Everything here works on ``fractions.Fraction`` and Python integers, so
results are exact and never overflow.
"""

from __future__ import annotations

import logging
from collections.abc import Iterable, Sequence
from fractions import Fraction
from functools import reduce
from math import gcd, lcm

from .errors import DomainError, UnitRootNotRational, VerificationFailed
from .models import EuclidData, ValueGroupLevel

logger = logging.getLogger(__name__)


def format_rational(r: Fraction | int) -> str:
    """Render as "num/den"; the denominator is always written."""
    r = Fraction(r)
    return f"{r.numerator}/{r.denominator}"


def parse_rational(s: str | int | Fraction) -> Fraction:
    """Parse "num/den" or "num" into a Fraction.

    Raises:
        DomainError: For floats, booleans, or malformed strings
    """
    if isinstance(s, bool) or isinstance(s, float):
        raise DomainError(f"expected an exact rational, got {s!r}")
    if isinstance(s, (int, Fraction)):
        return Fraction(s)
    if not isinstance(s, str):
        raise DomainError(f"expected a rational string, got {s!r}")
    text = s.strip()
    num, sep, den = text.partition("/")
    try:
        n = int(num)
        d = int(den) if sep else 1
    except ValueError as e:
        raise DomainError(f"malformed rational {s!r}") from e
    if d == 0:
        raise DomainError(f"zero denominator in {s!r}")
    return Fraction(n, d)


def zgcd(a: Fraction | int, b: Fraction | int) -> Fraction:
    """Greatest g > 0 with a and b both in gZ.

    Raises:
        DomainError: If both inputs are zero
    """
    a, b = Fraction(a), Fraction(b)
    if a == 0 and b == 0:
        raise DomainError("zgcd(0, 0) is undefined")
    if a == 0:
        return abs(b)
    if b == 0:
        return abs(a)
    return Fraction(gcd(a.numerator, b.numerator), lcm(a.denominator, b.denominator))


def zgcd_all(values: Iterable[Fraction | int]) -> Fraction:
    return reduce(zgcd, values)


def continuant(c: Sequence[int]) -> int:
    """P_k(c_1..c_k) with P_0 = 1, P_-1 = 0 and P_k = c_k P_{k-1} + P_{k-2}."""
    prev, cur = 0, 1
    for ci in c:
        prev, cur = cur, ci * cur + prev
    return cur


def _continuant_or_zero(c: Sequence[int], length: int) -> int:
    # P_{-1} = 0 for an "empty range of length -1"
    return 0 if length < 0 else continuant(c)


def euclid_data(p: int, q: int) -> EuclidData:
    """Run the Euclidean algorithm with r_0 = p, r_1 = q.

    When p < q the first quotient f_1 is 0.

    Returns:
        EuclidData with the quotients, their partial sums, eps and the Bezout pair

    Raises:
        DomainError: If p, q are not coprime positive integers
    """
    if p < 1 or q < 1:
        raise DomainError(f"({p}, {q}) must be positive")
    if gcd(p, q) != 1:
        raise DomainError(f"({p}, {q}) is not coprime")
    f: list[int] = []
    r_prev, r = p, q
    while r:
        f.append(r_prev // r)
        r_prev, r = r, r_prev % r
    N = len(f)
    F = []
    total = 0
    for fi in f:
        total += fi
        F.append(total)
    top = continuant(f[: N - 1])
    low = _continuant_or_zero(f[1 : N - 1], N - 2)
    if N % 2:
        a, b = top, low
    else:
        a, b = p - top, q - low
    if a * q - b * p != 1:
        raise VerificationFailed(
            f"Bezout pair ({a}, {b}) fails for ({p}, {q})", reference="a*q - b*p = 1"
        )
    return EuclidData(p=p, q=q, N=N, f=tuple(f), F=tuple(F), epsilon=total, a=a, b=b)


def value_group_level(
    betas: Sequence[Fraction | int | str], qs: Sequence[int]
) -> ValueGroupLevel:
    """Level k = len(qs) of the value group, with generators parsed from "num/den".

    Raises:
        DomainError: If the counts disagree or Q_k beta_k is not an integer
    """
    return ValueGroupLevel(len(qs), tuple(parse_rational(b) for b in betas), tuple(qs))


def group_gcd(level: ValueGroupLevel) -> Fraction:
    """zgcd of beta_0..beta_k; equals 1/Q_k for levels built from a spec."""
    return zgcd_all(level.betas)


def order_in_quotient(qk: int, qk_beta_k: Fraction, prev: ValueGroupLevel) -> int:
    """Order of the class of qk_beta_k in Gamma_{k-1} / qk Gamma_{k-1}.

    Raises:
        DomainError: If qk_beta_k is not in Gamma_{k-1}
    """
    m = Fraction(qk_beta_k) / group_gcd(prev)
    if m.denominator != 1:
        raise DomainError(f"{qk_beta_k} is not in the group generated by {prev.betas}")
    return qk // gcd(m.numerator, qk)


def _representation(x: Fraction, level: ValueGroupLevel) -> list[int]:
    a = [0] * (level.k + 1)
    rest = Fraction(x)
    Q = 1
    Qs = []
    for q in level.qs:
        Q *= q
        Qs.append(Q)
    for j in range(level.k, 0, -1):
        qj = level.qs[j - 1]
        if qj == 1:
            continue
        P = rest * Qs[j - 1]
        ptilde = Qs[j - 1] * level.betas[j]
        if P.denominator != 1 or ptilde.denominator != 1:
            raise DomainError(f"{x} is not in the group of level {j}")
        a[j] = (P.numerator * pow(ptilde.numerator, -1, qj)) % qj
        rest -= a[j] * level.betas[j]
    a0 = rest / level.betas[0]
    if a0.denominator != 1 or a0 < 0:
        raise DomainError(f"{x} has no representation with nonnegative a_0 (remainder {a0})")
    a[0] = a0.numerator
    return a


def unique_representation(x: Fraction | int, level: ValueGroupLevel) -> list[int]:
    """Write x = sum a_j beta_j with 0 <= a_j < q_j for j >= 1.

    Follows the constructive argument: a_k solves a_k Q_k beta_k = Q_k x
    modulo q_k, then recurse on x - a_k beta_k.

    Raises:
        DomainError: If x is not in Gamma_k or x < q_k beta_k
    """
    x = Fraction(x)
    if (x / group_gcd(level)).denominator != 1:
        raise DomainError(f"{x} is not in Gamma_{level.k}")
    if level.k >= 1:
        bound = level.qs[-1] * level.betas[-1]
        if x < bound:
            raise DomainError(f"{x} is below q_k beta_k = {bound}")
    elif x < 0:
        raise DomainError(f"{x} is negative")
    a = _representation(x, level)
    logger.debug("representation of %s at level %d: %s", x, level.k, a)
    return a


def _integer_root(n: int, t: int) -> int | None:
    if n < 0:
        if t % 2 == 0:
            return None
        r = _integer_root(-n, t)
        return None if r is None else -r
    lo, hi = 0, 1
    while hi**t <= n:
        hi *= 2
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if mid**t <= n:
            lo = mid
        else:
            hi = mid - 1
    return lo if lo**t == n else None


def rational_root(r: Fraction | int, t: int) -> Fraction:
    """Exact t-th root of a rational.

    Raises:
        UnitRootNotRational: If r has no rational t-th root
    """
    r = Fraction(r)
    if t < 1:
        raise DomainError(f"root index must be positive, got {t}")
    if r == 0:
        raise DomainError("zero is not a unit")
    num = _integer_root(r.numerator, t)
    den = _integer_root(r.denominator, t)
    if num is None or den is None:
        raise UnitRootNotRational(f"{format_rational(r)} is not a {t}-th power in Q")
    return Fraction(num, den)
