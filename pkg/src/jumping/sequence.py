"""Jumping polynomials, values, and the independent subsequence.

Values are computed in the scale v(x) = 1 and multiplied by ``spec.mu``
when reported.

Monomials in T_0..T_i are handled as integer exponent vectors. Each such
monomial factors as x_i^v times a product of the units
u_m = T_m^{q_m} / prod_j T_j^{n_{m,j}}, whose residue is lambda_m; the
helpers at the bottom of this module compute that factorization.
"""

from __future__ import annotations

import logging
from collections.abc import Sequence
from fractions import Fraction
from math import gcd

from .arithmetic import (
    euclid_data,
    group_gcd,
    order_in_quotient,
    unique_representation,
    value_group_level,
)
from .errors import DomainError, LevelBoundExceeded, VerificationFailed
from .models import (
    DEFAULT_MAX_LEVEL,
    Classification,
    CriterionFailure,
    CriterionReport,
    Expansion,
    ExpansionTerm,
    IndependentData,
    JumpingSequence,
    ValuationSpec,
)
from .poly import BiPoly, divide_monic_in_y

logger = logging.getLogger(__name__)

Exponents = tuple[int, ...]


def _betas(spec: ValuationSpec, k: int) -> list[Fraction]:
    beta = [Fraction(1)]
    Q = 1
    for i in range(1, k + 1):
        p, q = spec.pairs[i - 1]
        if i == 1:
            beta.append(Fraction(p, q))
        else:
            beta.append(spec.pairs[i - 2][1] * beta[-1] + Fraction(p, Q * q))
        Q *= q
    return beta


def _monomial_product(T: Sequence[BiPoly], exps: Sequence[int]) -> BiPoly:
    result = BiPoly.one()
    for Tj, e in zip(T, exps):
        if e:
            result = result * Tj**e
    return result


def build_sequence(spec: ValuationSpec, k: int | None = None) -> JumpingSequence:
    """Build T_0..T_{k+1} with values beta_0..beta_k.

    T_{i+1} = T_i^{q_i} - lambda_i prod_{j<i} T_j^{n_{i,j}}, where the row
    n_{i,.} is the unique representation of q_i beta_i.

    Args:
        spec: Pairs, lambdas and mu of the valuation
        k: Last level, the full spec when omitted

    Returns:
        JumpingSequence with k + 2 polynomials and k + 1 values

    Raises:
        DomainError: If k exceeds the length of the spec
    """
    if k is None:
        k = spec.length
    if k < 0 or k > spec.length:
        raise DomainError(f"level {k} outside 0..{spec.length}")
    beta = _betas(spec, k)
    qs = spec.qs[:k]
    Q = [1]
    for q in qs:
        Q.append(Q[-1] * q)
    T = [BiPoly.x(), BiPoly.y()]
    rows: list[tuple[int, ...]] = []
    d: list[int] = []
    for i in range(1, k + 1):
        p, q = spec.pairs[i - 1]
        lam = spec.lambdas[i - 1]
        level = value_group_level(beta[:i], qs[: i - 1])
        row = tuple(unique_representation(q * beta[i], level))
        rows.append(row)
        T.append(T[i] ** q - _monomial_product(T, row) * lam)
        d.append(gcd(d[-1], p) if d else p)
        if T[i + 1].degree_y != Q[i] or not T[i + 1].is_monic_in_y:
            raise VerificationFailed(
                f"T_{i + 1} is not monic of y-degree {Q[i]}", reference="deg_y T_i = Q_{i-1}"
            )
        logger.debug("T_%d built from row %s", i + 1, row)
    logger.info("built jumping sequence to level %d", k)
    return JumpingSequence(
        spec=spec,
        T=tuple(T),
        beta=tuple(beta),
        Q=tuple(Q),
        n_rows=tuple(rows),
        d=tuple(d),
    )


def classify(spec: ValuationSpec, level: int | None = None) -> Classification:
    """Discrete if every q_i seen is 1, non-discrete at this level if some q_i > 1."""
    k = spec.length if level is None else min(level, spec.length)
    if k == 0:
        return Classification.UNDETERMINED
    if any(q > 1 for q in spec.qs[:k]):
        return Classification.NONDISCRETE
    return Classification.DISCRETE


def independent_subsequence(seq: JumpingSequence) -> IndependentData:
    """Extract H_l = T_{i_l} for the indices with q_{i_l} > 1.

    Raises:
        VerificationFailed: If the derived data violate the recursion for beta-bar
    """
    k = seq.level
    indices = [0] + [i for i in range(1, k + 1) if seq.q(i) > 1]
    qbar: list[int] = []
    pbar: list[int] = []
    betabar = [seq.beta[0]]
    Qbar = [1]
    rows: list[tuple[int, ...]] = []
    for lv in range(1, len(indices)):
        il, prev = indices[lv], indices[lv - 1]
        qb = seq.q(il)
        pb = sum(seq.p(i) for i in range(prev + 1, il)) * qb + seq.p(il)
        qbar.append(qb)
        pbar.append(pb)
        betabar.append(seq.beta[il])
        Qbar.append(Qbar[-1] * qb)
        rows.append(tuple(seq.row(il)[indices[j]] for j in range(lv)))
    intermediate = []
    for i in range(1, k + 1):
        if seq.q(i) > 1:
            continue
        lv = sum(1 for il in indices[1:] if il < i)
        if lv == 0:
            continue
        intermediate.append((i, lv, tuple(seq.row(i)[indices[j]] for j in range(lv + 1))))
    for lv in range(1, len(indices)):
        pb, qb = pbar[lv - 1], qbar[lv - 1]
        if gcd(pb, qb) != 1:
            raise VerificationFailed(f"(pbar_{lv}, qbar_{lv}) = ({pb}, {qb}) is not coprime")
        expected = (
            Fraction(pb, qb)
            if lv == 1
            else qbar[lv - 2] * betabar[lv - 1] + Fraction(pb, Qbar[lv - 1] * qb)
        )
        if betabar[lv] != expected:
            raise VerificationFailed(
                f"betabar_{lv} = {betabar[lv]} but the recursion gives {expected}",
                reference="betabar_{l+1} = qbar_l betabar_l + pbar_{l+1} / (Qbar_l qbar_{l+1})",
            )
    minimal_from = 0 if k == 0 or seq.p(1) > 1 else 1
    return IndependentData(
        indices=tuple(indices),
        H=tuple(seq.T[i] for i in indices),
        qbar=tuple(qbar),
        pbar=tuple(pbar),
        betabar=tuple(betabar),
        Qbar=tuple(Qbar),
        rows=tuple(rows),
        intermediate=tuple(intermediate),
        minimal_from=minimal_from,
    )


def verify_spivakovsky(ind: IndependentData) -> CriterionReport:
    """Check the three-condition criterion for H_0, H_1, ... to be a generating sequence.

    The values gamma_l are recomputed from the exponent rows alone, so
    tampered rows show up as failed conditions rather than exceptions.
    """
    gammas = [Fraction(1)]
    for lv, row in enumerate(ind.rows, start=1):
        gammas.append(sum((n * g for n, g in zip(row, gammas)), Fraction(0)) / ind.qbar[lv - 1])
    failures: list[CriterionFailure] = []
    L = len(ind.rows)
    for lv in range(1, L + 1):
        qb = ind.qbar[lv - 1]
        try:
            prev = value_group_level(gammas[:lv], ind.qbar[: lv - 1])
            order = order_in_quotient(qb, qb * gammas[lv], prev)
        except DomainError as e:
            failures.append(CriterionFailure(1, lv, str(e)))
        else:
            if order != qb:
                failures.append(
                    CriterionFailure(1, lv, f"qbar_{lv} gamma_{lv} has order {order}, not {qb}")
                )
    for lv in range(1, L):
        if not gammas[lv + 1] > ind.qbar[lv - 1] * gammas[lv]:
            failures.append(
                CriterionFailure(
                    2, lv, f"gamma_{lv + 1} = {gammas[lv + 1]} <= qbar_{lv} gamma_{lv}"
                )
            )
    for i_prime, lv, row in ind.intermediate:
        total = sum((n * g for n, g in zip(row, gammas)), Fraction(0))
        bound = ind.qbar[lv - 1] * gammas[lv]
        if not total > bound:
            failures.append(
                CriterionFailure(3, i_prime, f"row {i_prime} has value {total} <= {bound}")
            )
    if failures:
        logger.info("criterion fails: %s", [(f.condition, f.index) for f in failures])
    return CriterionReport(gammas=tuple(gammas), failures=tuple(failures))


def _expand(f: BiPoly, seq: JumpingSequence, k: int) -> list[tuple[Exponents, Fraction]]:
    if k == 0:
        if f.degree_y > 0:
            raise DomainError("a level-0 expansion needs a polynomial in x alone")
        return [((i,), c) for (i, _), c in f.terms.items()]
    out: list[tuple[Exponents, Fraction]] = []
    for a_k, digit in enumerate(divide_monic_in_y(f, seq.T[k])):
        if digit.is_zero:
            continue
        for exps, c in _expand(digit, seq, k - 1):
            out.append((exps + (a_k,), c))
    return out


def canonical_expansion(f: BiPoly, seq: JumpingSequence, k: int) -> Expansion:
    """Write f as a sum of monomials in T_0..T_k with a_j < q_j for 1 <= j < k."""
    if k < 0 or k > seq.level:
        raise DomainError(f"level {k} outside 0..{seq.level}")
    terms = [
        ExpansionTerm(exps, c, sum((a * b for a, b in zip(exps, seq.beta)), Fraction(0)))
        for exps, c in sorted(_expand(f, seq, k))
    ]
    return Expansion(level=k, terms=tuple(terms))


def truncated_value(f: BiPoly, seq: JumpingSequence, k: int) -> Fraction:
    """The least monomial value of the level-k expansion, a lower bound for the value of f."""
    if f.is_zero:
        raise DomainError("the zero polynomial has no value")
    return canonical_expansion(f, seq, k).min_value * seq.spec.mu


def _residue_polynomial(expansion: Expansion, seq: JumpingSequence) -> dict[int, Fraction]:
    k = expansion.level
    qk = seq.q(k)
    row = seq.row(k)
    coefficients: dict[int, Fraction] = {}
    r0: int | None = None
    ref: list[int] | None = None
    for term in expansion.minimal_terms():
        r, s = divmod(term.exponents[k], qk)[::-1]
        if r0 is None:
            r0 = r
        elif r != r0:
            raise VerificationFailed(
                "tied terms disagree on the T_k exponent modulo q_k",
                reference="uniqueness of representation",
            )
        b = [term.exponents[j] + s * row[j] for j in range(k)]
        if ref is None:
            ref = b
        diff = tuple(x - y for x, y in zip(b, ref))
        res = monomial_residue(seq, diff)
        coefficients[s] = coefficients.get(s, Fraction(0)) + term.coefficient * res
    return coefficients


def value(
    f: BiPoly, spec: ValuationSpec | JumpingSequence, max_level: int = DEFAULT_MAX_LEVEL
) -> Fraction:
    """The value of f, certified by the residue-polynomial test.

    At level k the least-value terms of the expansion are grouped by powers
    of Z = T_k^{q_k} / prod T_j^{n_{k,j}}; the value is achieved exactly when
    the resulting polynomial R(Z) does not vanish at lambda_k.

    Raises:
        DomainError: If f is zero
        LevelBoundExceeded: If no level up to max_level certifies the value
    """
    if f.is_zero:
        raise DomainError("the zero polynomial has no value")
    if isinstance(spec, JumpingSequence):
        seq = spec
        top = min(max_level, seq.level)
    else:
        top = min(max_level, spec.length)
        seq = build_sequence(spec, top)
    mu = seq.spec.mu
    if f.degree_y == 0:
        return min(i for i, _ in f.terms) * mu
    for k in range(1, top + 1):
        expansion = canonical_expansion(f, seq, k)
        R = _residue_polynomial(expansion, seq)
        lam = seq.lam(k)
        at_lambda = sum((c * lam**s for s, c in R.items()), Fraction(0))
        logger.debug(
            "level %d: least value %s, R(lambda_%d) = %s", k, expansion.min_value, k, at_lambda
        )
        if at_lambda != 0:
            return expansion.min_value * mu
    raise LevelBoundExceeded(
        f"value not certified within {top} levels", reference="R(lambda_k) != 0"
    )


def _vector(seq: JumpingSequence) -> list[int]:
    return [0] * len(seq.T)


def monomial_value(seq: JumpingSequence, exps: Sequence[int]) -> Fraction:
    """Value of prod T_j^{e_j} in the scale v(x) = 1."""
    if any(e for e in exps[len(seq.beta) :]):
        raise DomainError("monomial involves T_j beyond the built level")
    return sum((e * b for e, b in zip(exps, seq.beta)), Fraction(0))


def relation_exponents(seq: JumpingSequence, m: int) -> Exponents:
    """Exponents of u_m = T_m^{q_m} / prod_{j<m} T_j^{n_{m,j}}."""
    e = _vector(seq)
    e[m] = seq.q(m)
    for j, n in enumerate(seq.row(m)):
        e[j] -= n
    return tuple(e)


def strict_parameter(seq: JumpingSequence, i: int) -> Exponents:
    """Exponents of y_i = T_{i+1} / prod_{j<i} T_j^{n_{i,j}} (y_0 = T_1)."""
    e = _vector(seq)
    e[i + 1] = 1
    if i >= 1:
        for j, n in enumerate(seq.row(i)):
            e[j] -= n
    return tuple(e)


def x_parameter(seq: JumpingSequence, i: int) -> Exponents:
    """Exponents of the exceptional parameter x_i = x_{i-1}^{a_i} / y_{i-1}^{b_i}."""
    e = _vector(seq)
    e[0] = 1
    for m in range(1, i + 1):
        ed = euclid_data(seq.p(m), seq.q(m))
        w = strict_parameter(seq, m - 1)
        e = [ed.a * x - ed.b * y for x, y in zip(e, w)]
    return tuple(e)


def decompose_monomial(
    seq: JumpingSequence, exps: Sequence[int], i: int
) -> tuple[int, tuple[int, ...]]:
    """Factor a monomial in T_0..T_i as x_i^v prod_{m=1}^{i} u_m^{c_m}.

    Returns:
        (v, (c_1, ..., c_i))

    Raises:
        DomainError: If the monomial involves T_j with j > i
    """
    e = list(exps) + [0] * (len(seq.T) - len(exps))
    if any(e[i + 1 :]):
        raise DomainError(f"monomial {tuple(exps)} involves T_j beyond T_{i}")
    v = monomial_value(seq, e) * seq.Q[i]
    if v.denominator != 1:
        raise VerificationFailed(f"value {v} of a level-{i} monomial is not in (1/Q_{i})Z")
    v = v.numerator
    xi = x_parameter(seq, i)
    e = [a - v * b for a, b in zip(e, xi)]
    coeffs = [0] * i
    for m in range(i, 0, -1):
        c, rem = divmod(e[m], seq.q(m))
        if rem:
            raise VerificationFailed(
                f"T_{m} exponent {e[m]} is not a multiple of q_{m}",
                reference="value-zero monomials are products of u_m",
            )
        coeffs[m - 1] = c
        e = [a - c * b for a, b in zip(e, relation_exponents(seq, m))]
    if any(e):
        raise VerificationFailed(f"monomial {tuple(exps)} does not reduce to x_{i} and u_m")
    return v, tuple(coeffs)


def top_index(exps: Sequence[int]) -> int:
    return max((j for j, e in enumerate(exps) if e), default=0)


def monomial_residue(seq: JumpingSequence, exps: Sequence[int]) -> Fraction:
    """Residue of a value-zero monomial: prod lambda_m^{c_m}.

    Raises:
        DomainError: If the monomial does not have value zero
    """
    if monomial_value(seq, list(exps) + [0] * (len(seq.T) - len(exps))) != 0:
        raise DomainError(f"monomial {tuple(exps)} has nonzero value")
    i = top_index(exps)
    _, coeffs = decompose_monomial(seq, exps, i)
    result = Fraction(1)
    for m, c in enumerate(coeffs, start=1):
        result *= seq.lam(m) ** c
    return result


def group_of(seq: JumpingSequence, k: int) -> Fraction:
    """Generator of the group spanned by beta_0..beta_k."""
    return group_gcd(seq.level_data(k))
