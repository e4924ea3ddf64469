"""Sequences of quadratic transforms along the valuation.

A chain starts at the base chart (x, y) with E = {x = 0}. Each level i
contributes a composite step of eps(p_i, q_i) quadratic transforms ending
at the checkpoint chart k_i, whose coordinates are the exceptional
parameter x_i and the strict transform y_i of T_{i+1}.

Checkpoint maps write x and y back in terms of (x_i, y_i). They are
truncated power series, so every identity checked through them holds
below the configured precision.
"""

from __future__ import annotations

import logging
from dataclasses import replace
from fractions import Fraction
from math import ceil

from .arithmetic import euclid_data
from .errors import (
    DomainError,
    NonFreeChart,
    PrecisionExhausted,
    ResidueMismatch,
    VerificationFailed,
)
from .models import (
    DEFAULT_PRECISION,
    Chart,
    Checkpoint,
    FactorizationRecord,
    FactorizationReport,
    FreePattern,
    JumpingSequence,
    StepCase,
    TransformTrace,
    ValuationSpec,
)
from .poly import (
    BiPoly,
    LaurentBiPoly,
    PowerSeries,
    SubstitutionMap,
    factor_exceptional,
    substitute,
)
from .poly import residue as residue_of
from .sequence import (
    build_sequence,
    decompose_monomial,
    monomial_residue,
    strict_parameter,
    x_parameter,
)

logger = logging.getLogger(__name__)


def quadratic_step(
    chart: Chart, residue: Fraction | None = None, next_value: Fraction | None = None
) -> Chart:
    """Blow up the maximal ideal and follow the valuation into one chart.

    Case (a) replaces y by y/x, case (b) replaces x by x/y, case (c)
    replaces y by y/x - residue. The value of the new second coordinate
    after case (c) is not determined by the chart and is taken from
    ``next_value``.

    Raises:
        DomainError: If a value is unknown, or case (c) is reached without a residue
    """
    vx, vy = chart.values
    if vy is None:
        raise DomainError("the second coordinate has no known value")
    (fx, fy) = chart.frame
    ex, ey = chart.exceptional
    if vx < vy:
        new = replace(
            chart,
            values=(vx, vy - vx),
            exceptional=(True, ey),
            case=StepCase.A,
            frame=(fx, (fy[0] - fx[0], fy[1] - fx[1])),
            residue=None,
        )
    elif vx > vy:
        new = replace(
            chart,
            values=(vx - vy, vy),
            exceptional=(ex, True),
            case=StepCase.B,
            frame=((fx[0] - fy[0], fx[1] - fy[1]), fy),
            residue=None,
        )
    else:
        if residue is None or residue == 0:
            raise DomainError("case (c) needs the nonzero residue of y/x")
        new = replace(
            chart,
            values=(vx, next_value),
            exceptional=(True, False),
            case=StepCase.C,
            frame=((1, 0), (0, 1)),
            residue=Fraction(residue),
        )
    new = replace(new, depth=chart.depth + 1, map_to_base=None)
    logger.debug("step %d: case %s, values %s", new.depth, new.case.value, new.values)
    return new


def _expected_free(index: int, f1: int, epsilon: int, q: int) -> bool:
    if index <= f1 or index == epsilon:
        return True
    return q == 1


def composite_chain(
    chart: Chart, p: int, q: int, c: Fraction, next_value: Fraction | None = None
) -> list[Chart]:
    """The eps(p, q) charts of one composite step, in order.

    The terminal chart has X = x^a / y^b and Y = y^q / x^p - c. Charts
    S_1..S_{f_1} and the terminal chart are free; the ones in between are
    free exactly when q = 1.

    Raises:
        NonFreeChart: If x is not the exceptional parameter of a free chart
        DomainError: If the values of the chart are not in ratio p/q
        VerificationFailed: If the chain violates the expected shape
    """
    if not chart.free or not chart.exceptional_is_x:
        raise NonFreeChart(
            f"chart at depth {chart.depth} has no exceptional parameter x",
            reference="permissible parameters",
        )
    vx, vy = chart.values
    if vy is None or vy * q != vx * p:
        raise DomainError(f"chart values {vx}, {vy} are not in ratio {p}/{q}")
    ed = euclid_data(p, q)
    current = replace(chart, frame=((1, 0), (0, 1)))
    chain: list[Chart] = []
    for step in range(ed.epsilon):
        last = step == ed.epsilon - 1
        if last:
            fx, fy = current.frame
            if fx != (ed.a, -ed.b) or (fy[0] - fx[0], fy[1] - fx[1]) != (-p, q):
                raise VerificationFailed(
                    f"before case (c) the frame is {current.frame}",
                    reference="X = x^a / y^b, Y + c = y^q / x^p",
                )
        nxt = quadratic_step(
            current,
            residue=c if last else None,
            next_value=next_value if last else None,
        )
        if (nxt.case is StepCase.C) != last:
            raise VerificationFailed(
                f"case (c) at step {step + 1} of {ed.epsilon}", reference="k = eps(p, q)"
            )
        chain.append(nxt)
        current = nxt
    for index, ch in enumerate([chart, *chain]):
        if ch.free != _expected_free(index, ed.f[0], ed.epsilon, q):
            raise VerificationFailed(
                f"chart {index} of the ({p}, {q}) step has free = {ch.free}",
                reference="S_k non-free iff f_1 < k < eps and q > 1",
            )
    if chain[-1].values[0] * q != vx:
        raise VerificationFailed(
            f"v(X) = {chain[-1].values[0]}, expected {vx / q}", reference="v(X) = v(x) / q"
        )
    if chart.map_to_base is not None:
        step_map = SubstitutionMap.composite_chart(p, q, ed.a, ed.b, Fraction(c))
        chain[-1] = replace(chain[-1], map_to_base=chart.map_to_base.compose(step_map))
    return chain


def verify_chart_identity(p: int, q: int, c: Fraction) -> bool:
    """Check x^a / y^b = X and y^q / x^p = Y + c under x = X^q (Y+c)^b, y = X^p (Y+c)^a.

    Both Laurent monomials are pulled back through the chart map.

    Raises:
        VerificationFailed: If either pullback differs
    """
    ed = euclid_data(p, q)
    smap = SubstitutionMap.composite_chart(p, q, ed.a, ed.b, Fraction(c))
    if substitute(LaurentBiPoly.monomial(ed.a, -ed.b), smap).series() != PowerSeries.X():
        raise VerificationFailed(
            f"x^a / y^b != X for (p, q) = ({p}, {q})", reference="X = x^a / y^b"
        )
    shifted = PowerSeries({(0, 0): c, (0, 1): 1})
    if substitute(LaurentBiPoly.monomial(-p, q), smap).series() != shifted:
        raise VerificationFailed(
            f"y^q / x^p != Y + c for (p, q) = ({p}, {q})", reference="Y = y^q / x^p - c"
        )
    return True


def composite_transform(
    chart: Chart, p: int, q: int, c: Fraction, next_value: Fraction | None = None
) -> Chart:
    """Terminal chart of the composite step for (p, q) with residue c."""
    verify_chart_identity(p, q, c)
    return composite_chain(chart, p, q, c, next_value)[-1]


def unit_product(units: dict[int, PowerSeries], coeffs, precision: int) -> PowerSeries:
    """prod_m u_m^{c_m}, truncated to the given precision."""
    result = PowerSeries.constant(1, precision)
    for m, c in enumerate(coeffs, start=1):
        if c:
            result = result * units[m] ** c
    return result.with_precision(precision)


def checkpoint_units(seq: JumpingSequence, i: int, precision: int) -> dict[int, PowerSeries]:
    """The units u_m (m = 1..i) as series in the checkpoint coordinates (x_i, y_i).

    u_i = y_i + lambda_i. For m < i, u_m = y_m + lambda_m and y_m is a
    monomial x_i^e prod u^c with e > 0, so the system is solved by
    iterating until it is stable.

    Raises:
        PrecisionExhausted: If the iteration does not settle
    """
    Y = PowerSeries({(0, 1): 1}, precision)
    units = {m: PowerSeries.constant(seq.lam(m), precision) for m in range(1, i + 1)}
    if i == 0:
        return units
    units[i] = Y + seq.lam(i)
    strict: dict[int, tuple[int, tuple[int, ...]]] = {}
    for m in range(1, i):
        e, coeffs = decompose_monomial(seq, strict_parameter(seq, m), i)
        if e <= 0:
            raise VerificationFailed(f"y_{m} has x_{i}-order {e} at checkpoint {i}")
        strict[m] = (e, coeffs)
    for _ in range(precision + 1):
        new = dict(units)
        for m, (e, coeffs) in strict.items():
            y_m = unit_product(units, coeffs, precision).shift(e, 0).with_precision(precision)
            new[m] = y_m + seq.lam(m)
        if all(new[m] == units[m] for m in strict):
            return units
        units = new
    raise PrecisionExhausted(f"units at checkpoint {i} did not settle below precision {precision}")


def checkpoint_map(
    seq: JumpingSequence,
    i: int,
    precision: int = DEFAULT_PRECISION,
    units: dict[int, PowerSeries] | None = None,
) -> SubstitutionMap:
    """x = x_i^{Q_i} gamma_0 and y = x_i^{Q_i beta_1} gamma_1 in chart k_i."""
    if i == 0:
        return SubstitutionMap.identity()
    if units is None:
        units = checkpoint_units(seq, i, precision)
    images = []
    for j in (0, 1):
        e = [0] * len(seq.T)
        e[j] = 1
        v, coeffs = decompose_monomial(seq, e, i)
        expected = seq.Q[i] * seq.beta[j]
        if v != expected:
            raise VerificationFailed(
                f"T_{j} has x_{i}-order {v}, expected {expected}",
                reference="T_j = x_i^(Q_i*beta_j) * unit",
            )
        images.append(((v, 0), unit_product(units, coeffs, precision)))
    return SubstitutionMap(images[0], images[1])


def checkpoint_step(
    seq: JumpingSequence,
    i: int,
    precision: int = DEFAULT_PRECISION,
    units: dict[int, PowerSeries] | None = None,
) -> SubstitutionMap:
    """x_{i-1} = x_i^{q_i} u and y_{i-1} = x_i^{p_i} w in chart k_i.

    This is the composite step of level i written in checkpoint coordinates;
    the residue of w^{q_i} / u^{p_i} is the c of the step.

    Raises:
        VerificationFailed: If the x_i-orders are not q_i and p_i
    """
    if i < 1:
        raise DomainError("the step of level 0 does not exist")
    if units is None:
        units = checkpoint_units(seq, i, precision)
    images = []
    for name, exps, expected in (
        ("x", x_parameter(seq, i - 1), seq.q(i)),
        ("y", strict_parameter(seq, i - 1), seq.p(i)),
    ):
        v, coeffs = decompose_monomial(seq, exps, i)
        if v != expected:
            raise VerificationFailed(
                f"{name}_{i - 1} has x_{i}-order {v}, expected {expected}",
                reference="x_{i-1} = x_i^q_i * unit, y_{i-1} = x_i^p_i * unit",
            )
        images.append(((v, 0), unit_product(units, coeffs, precision)))
    return SubstitutionMap(images[0], images[1])


def step_residue(step: SubstitutionMap, p: int, q: int) -> Fraction:
    """Residue c of y^q / x^p, where ``step`` writes x and y as x'^q u and x'^p w."""
    (_, u), (_, w) = step.x_image, step.y_image
    return residue_of(w**q / u**p)


def pullback_precision(
    f: LaurentBiPoly, seq: JumpingSequence, i: int, order: Fraction | int
) -> int:
    """Truncation order at which f shows x_i-order ``order`` and its linear term in y_i.

    The terms of f land at x_i-orders Q_i (a + b beta_1) and those below
    ``order`` cancel, so coefficients up to that gap plus one must be known.
    """
    low = min(seq.Q[i] * (a * seq.beta[0] + b * seq.beta[1]) for a, b in f.terms)
    return max(ceil(order - low), 0) + 2


def checkpoint_precision(spec: ValuationSpec, i: int) -> int:
    """Smallest precision at which every checkpoint identity up to level i is visible.

    At checkpoint m this covers T_0..T_m and the strict transform T_{m+1}.
    """
    seq = build_sequence(spec, i)
    needed = 2
    for m in range(1, i + 1):
        orders = [seq.Q[m] * seq.beta[j] for j in range(m + 1)]
        orders.append(seq.Q[m] * seq.q(m) * seq.beta[m])
        for j, order in enumerate(orders):
            needed = max(needed, pullback_precision(seq.T[j], seq, m, order))
    return needed


def _factorization(
    seq: JumpingSequence, i: int, smap: SubstitutionMap
) -> tuple[FactorizationReport, Fraction]:
    records = []
    cofactors: list[PowerSeries] = []
    for j in range(i + 1):
        order, cofactor, unit = factor_exceptional(substitute(seq.T[j], smap), "X")
        expected = seq.Q[i] * seq.beta[j]
        records.append(FactorizationRecord(j, order, int(expected), unit))
        if order != expected or not unit:
            raise VerificationFailed(
                f"T_{j} pulls back to x_{i}^{order} times a {'unit' if unit else 'non-unit'}, "
                f"expected x_{i}^{expected} times a unit",
                reference="T_j = x_i^(Q_i*beta_j) * unit",
            )
        cofactors.append(cofactor)
    if i == 0:
        return FactorizationReport(0, tuple(records), True), Fraction(1)
    row = seq.row(i)
    monomial = PowerSeries.one()
    for j, n in enumerate(row):
        if n:
            monomial = monomial * cofactors[j] ** n
    lam_residue = (cofactors[i] ** seq.q(i) / monomial).constant_term
    order, cofactor, _ = factor_exceptional(substitute(seq.T[i + 1], smap), "X")
    expected = seq.Q[i] * seq.q(i) * seq.beta[i]
    strict = cofactor / monomial
    strict_ok = order == expected and strict.agrees_with(PowerSeries.Y())
    if not strict_ok:
        raise VerificationFailed(
            f"T_{i + 1} does not pull back to x_{i}^{expected} times y_{i}",
            reference="y_i = T_{i+1} / prod T_j^(n_{i,j}) is the strict transform",
        )
    return FactorizationReport(i, tuple(records), strict_ok), lam_residue


def verify_monomial_factorization(
    trace: TransformTrace, seq: JumpingSequence, i: int
) -> FactorizationReport:
    """Pull T_0..T_i back to checkpoint i and check each is x_i^{Q_i beta_j} times a unit.

    Also checks that y_i is the strict transform of T_{i+1}.

    Raises:
        VerificationFailed: Naming the first T_j that fails
    """
    if i > min(trace.level, seq.level):
        raise DomainError(f"checkpoint {i} is beyond the trace or the sequence")
    smap = trace.chart_at(i).map_to_base
    if smap is None:
        smap = checkpoint_map(seq, i, trace.precision or DEFAULT_PRECISION)
    report, _ = _factorization(seq, i, smap)
    return report


def _jump(spec: ValuationSpec, Q: int, m: int) -> Fraction | None:
    """Value of y_m, the strict transform of T_{m+1}, if the spec reaches level m + 1."""
    if m >= spec.length:
        return None
    p, q = spec.pairs[m]
    return Fraction(p, Q * q) * spec.mu


def _free_runs(charts: tuple[Chart, ...] | list[Chart]) -> FreePattern:
    s_prime: list[int] = []
    s_bar: list[int] = []
    n = len(charts)
    s: int | None = 0 if n and charts[0].free else None
    while s is not None:
        s_prime.append(s)
        e = s
        while e + 1 < n and charts[e + 1].free:
            e += 1
        if e == n - 1:
            break
        s_bar.append(e)
        s = next((j for j in range(e + 1, n) if charts[j].free), None)
    return FreePattern(tuple(s_prime), tuple(s_bar))


def free_pattern(trace: TransformTrace) -> FreePattern:
    """Brackets of the maximal free runs, checked against their closed form.

    For the l-th level i_l with q > 1, the run ending there closes at
    k_{i_l - 1} + floor(p / q) and the next one opens at k_{i_l}.

    Raises:
        VerificationFailed: If the observed runs differ from the closed form
    """
    pattern = _free_runs(trace.charts)
    lv = 0
    for cp in trace.checkpoints[1:]:
        p, q = trace.spec.pairs[cp.i - 1]
        if q == 1:
            continue
        lv += 1
        closes = trace.checkpoints[cp.i - 1].k + p // q
        if len(pattern.s_bar) < lv or pattern.s_bar[lv - 1] != closes:
            raise VerificationFailed(
                f"free run {lv} should close at chart {closes}, found {pattern.s_bar[lv - 1:lv]}",
                reference="sbar_l = k_{i_l - 1} + floor(p_{i_l} / q_{i_l})",
            )
        if len(pattern.s_prime) <= lv or pattern.s_prime[lv] != cp.k:
            raise VerificationFailed(
                f"free run {lv + 1} should open at chart {cp.k}",
                reference="s'_{l+1} = k_{i_l}",
            )
    return pattern


def run_to_level(
    spec: ValuationSpec, i: int, precision: int | None = None
) -> TransformTrace:
    """Chain the composite steps for levels 1..i and verify every checkpoint.

    The map to the base chart is built by composing the level steps in
    checkpoint coordinates and is checked against the direct checkpoint map.
    Without an explicit precision the run uses the smallest order at which
    every checkpoint identity is visible.

    Args:
        spec: The valuation data
        i: Last level to reach
        precision: Truncation order of the series, planned when omitted

    Raises:
        DomainError: If i exceeds the spec length
        ResidueMismatch: If lambda_m is not the residue found at checkpoint m
        VerificationFailed: If a chart or factorization identity fails
        PrecisionExhausted: If the precision is too low for a check
    """
    if i < 0 or i > spec.length:
        raise DomainError(f"level {i} outside 0..{spec.length}")
    needed = checkpoint_precision(spec, i)
    if precision is None:
        precision = max(needed, DEFAULT_PRECISION)
    elif precision < needed:
        raise PrecisionExhausted(
            f"precision {precision} hides checkpoint identities up to level {i}; need {needed}",
            reference="precision > largest checked exponent",
        )
    seq = build_sequence(spec, i)
    mu = spec.mu
    base = Chart(
        depth=0,
        values=(mu, _jump(spec, 1, 0)),
        exceptional=(True, False),
        map_to_base=SubstitutionMap.identity(),
    )
    charts: list[Chart] = [base]
    checkpoints = [Checkpoint(0, 0, 0, Fraction(1), Fraction(1))]
    smap = SubstitutionMap.identity()
    for m in range(1, i + 1):
        p, q = spec.pairs[m - 1]
        units = checkpoint_units(seq, m, precision)
        step = checkpoint_step(seq, m, precision, units)
        c = step_residue(step, p, q)
        y_prev, x_prev = strict_parameter(seq, m - 1), x_parameter(seq, m - 1)
        expected_c = monomial_residue(seq, [q * a - p * b for a, b in zip(y_prev, x_prev)])
        if c != expected_c:
            raise VerificationFailed(
                f"step residue {c} at level {m} differs from {expected_c} on the lattice",
                reference="c = residue of y_(i-1)^q_i / x_(i-1)^p_i",
            )
        chain = composite_chain(
            replace(charts[-1], map_to_base=None), p, q, c, _jump(spec, seq.Q[m], m)
        )
        k = len(charts) - 1 + len(chain)
        if chain[-1].values[0] != mu / seq.Q[m]:
            raise VerificationFailed(
                f"v(x_{m}) = {chain[-1].values[0]}, expected {mu / seq.Q[m]}",
                reference="v(x_i) = 1 / Q_i",
            )
        smap = smap.compose(step).with_precision(precision)
        if not smap.agrees_with(checkpoint_map(seq, m, precision, units)):
            raise VerificationFailed(
                f"composed steps and checkpoint map differ at level {m}",
                reference="x = x_i^Q_i gamma_0, y = x_i^(Q_i beta_1) gamma_1",
            )
        report, residue = _factorization(seq, m, smap)
        lam = seq.lam(m)
        if residue != lam:
            raise ResidueMismatch(
                f"residue {residue} at checkpoint {m} differs from lambda_{m} = {lam}",
                reference="c_i = lambda_i",
            )
        chain[-1] = replace(chain[-1], map_to_base=smap)
        charts.extend(chain)
        checkpoints.append(Checkpoint(m, k, k, residue, lam, report.strict_transform_ok))
        logger.info("checkpoint %d verified at chart %d (precision %d)", m, k, precision)
    trace = TransformTrace(
        spec=spec,
        level=i,
        charts=tuple(charts),
        checkpoints=tuple(checkpoints),
        free_runs=_free_runs(charts),
        precision=precision,
    )
    free_pattern(trace)
    return trace


def pullback_value_oracle(f: BiPoly, trace: TransformTrace, i: int) -> tuple[Fraction, bool]:
    """Value of f read off its x_i-order at checkpoint i.

    Returns:
        (value, certified); the value is exact when the cofactor is a unit
        and a lower bound otherwise

    Raises:
        DomainError: If f is zero
    """
    if f.is_zero:
        raise DomainError("the zero polynomial has no value")
    if i > trace.level:
        raise DomainError(f"checkpoint {i} is beyond the trace level {trace.level}")
    smap = trace.chart_at(i).map_to_base
    if smap is None:
        smap = checkpoint_map(
            build_sequence(trace.spec, i), i, trace.precision or DEFAULT_PRECISION
        )
    order, _, unit = factor_exceptional(substitute(f, smap), "X")
    Q = 1
    for q in trace.spec.qs[:i]:
        Q *= q
    return Fraction(order, Q) * trace.spec.mu, unit
