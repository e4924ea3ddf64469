"""Descent of the exponent t for an extension R in S in normal form.

The state is u = x^t delta, v = y with delta a unit. When t divides every
p_i, the jumping polynomials of S[delta^(1/t)] are jumping polynomials of
R as well. Otherwise the first level M with t not dividing p_M is
reached through checkpoints where u_i = x_i^t delta_i, v_i = y_i, and a
chunk of quadratic transforms on both sides replaces t by gcd(t, p_M).

After a chunk the next iteration continues in the chart reached, with the
data of the levels after M and the unit produced by the chunk.
"""

from __future__ import annotations

import logging
from dataclasses import replace
from fractions import Fraction
from math import gcd

from .arithmetic import euclid_data, rational_root
from .errors import (
    DomainError,
    ObstructionPresent,
    PrecisionExhausted,
    StepBoundExceeded,
    VerificationFailed,
)
from .models import (
    DEFAULT_MAX_LEVEL,
    DEFAULT_PRECISION,
    DEFAULT_STEP_BOUND,
    Chart,
    ChunkReport,
    Classification,
    DescentIteration,
    DescentReport,
    ExtensionState,
    JumpingSequence,
    LadderCheck,
    ToroidalCertificate,
    ValuationCase,
    ValuationSpec,
)
from .poly import BiPoly, PowerSeries, unit_root
from .sequence import (
    build_sequence,
    classify,
    decompose_monomial,
    group_of,
    independent_subsequence,
    monomial_residue,
    monomial_value,
    strict_parameter,
    x_parameter,
)
from .transforms import checkpoint_units, composite_chain, unit_product

logger = logging.getLogger(__name__)


def extension_state(
    t: int,
    delta: PowerSeries,
    spec: ValuationSpec,
    precision: int = DEFAULT_PRECISION,
) -> ExtensionState:
    """Initial state at the base charts of R and S."""
    if t < 1:
        raise DomainError(f"exponent t must be positive, got {t}")
    if not delta.is_unit:
        raise DomainError("delta must be a unit")
    vy = spec.mu * Fraction(*spec.pairs[0]) if spec.length else None
    return ExtensionState(
        t=t,
        delta=delta,
        spec=spec,
        S_chart=Chart(depth=0, values=(spec.mu, vy), exceptional=(True, False)),
        R_chart=Chart(depth=0, values=(t * spec.mu, vy), exceptional=(True, False)),
        precision=precision,
    )


def required_precision(t: int, spec: ValuationSpec, level: int | None = None) -> int:
    """Smallest truncation order that covers the exponents of the checked identities."""
    k = spec.length if level is None else min(level, spec.length)
    return max([t, *spec.ps[:k], *spec.qs[:k]]) + 2


def adjoin_root(delta: PowerSeries, t: int) -> tuple[Fraction, PowerSeries]:
    """Split delta = kappa * delta_1 and return (kappa^(1/t), delta_1^(1/t)).

    Raises:
        UnitRootNotRational: If kappa is not a t-th power in Q
        VerificationFailed: If the root does not reproduce delta_1
    """
    kappa = delta.constant_term
    if not kappa:
        raise DomainError("delta is not a unit")
    root = rational_root(kappa, t)
    delta_1 = delta / kappa
    alpha = unit_root(delta_1, t)
    if not (alpha**t).agrees_with(delta_1):
        raise VerificationFailed(
            f"alpha^{t} differs from delta below precision", reference="alpha^t = delta"
        )
    return root, alpha


def find_M(spec: ValuationSpec, t: int, bound: int) -> int | None:
    """First level i <= bound with t not dividing p_i."""
    for i, p in enumerate(spec.ps[: max(bound, 0)], start=1):
        if p % t:
            return i
    return None


def check_xpowers(seq: JumpingSequence, k: int) -> bool:
    """True when every x-exponent in T_2..T_{k+1} is a multiple of d_k."""
    if k < 1 or k > seq.level:
        raise DomainError(f"level {k} outside 1..{seq.level}")
    d = seq.d[k - 1]
    return all(i % d == 0 for T in seq.T[2 : k + 2] for i in T.x_exponents())


def _r_spec(spec: ValuationSpec, t: int, k: int) -> ValuationSpec:
    return ValuationSpec(
        tuple((p // t, q) for p, q in spec.pairs[:k]), spec.lambdas[:k], spec.mu * t
    )


def transfer_sequence(state: ExtensionState, k: int) -> JumpingSequence:
    """Jumping polynomials of R: T'_0 = u, T'_i = T_i for i >= 1.

    Raises:
        ObstructionPresent: If t does not divide d_k
        VerificationFailed: If T'_i(x^t, y) differs from T_i or a row does not scale
    """
    spec, t = state.spec, state.t
    if k < 0 or k > spec.length:
        raise DomainError(f"level {k} outside 0..{spec.length}")
    M = find_M(spec, t, k)
    if M is not None:
        raise ObstructionPresent(M, t)
    seq = build_sequence(spec, k)
    rseq = build_sequence(_r_spec(spec, t, k), k)
    x_t, y = BiPoly.x() ** t, BiPoly.y()
    for i in range(1, k + 2):
        if rseq.T[i].subs(x_t, y) != seq.T[i]:
            raise VerificationFailed(f"T'_{i}(x^{t}, y) != T_{i}", reference="T'_i = T_i")
    for i in range(1, k + 1):
        row, rrow = seq.row(i), rseq.row(i)
        if rrow[0] * t != row[0] or rrow[1:] != row[1:]:
            raise VerificationFailed(
                f"row {i} of R is {rrow}, expected {row} with n_(i,0) / {t}",
                reference="n'_(i,0) = n_(i,0) / t",
            )
    logger.info("transferred %d levels with t = %d", k, t)
    return rseq


def _in_s(exps, t: int) -> list[int]:
    """Exponents over T'_0 = u rewritten over T_0, using u = T_0^t."""
    out = list(exps)
    out[0] *= t
    return out


def _ladder_unit(seq: JumpingSequence, rseq: JumpingSequence, t: int, i: int) -> list[int]:
    """Exponents of u_i / x_i^t, a monomial of value zero."""
    return [a - t * b for a, b in zip(_in_s(x_parameter(rseq, i), t), x_parameter(seq, i))]


def verify_ladder(state: ExtensionState, M: int) -> tuple[LadderCheck, ...]:
    """Check u_i = x_i^t delta_i and v_i = y_i at every checkpoint i < M.

    Raises:
        VerificationFailed: At the first checkpoint where either relation fails
    """
    if M <= 1:
        return ()
    t = state.t
    seq = build_sequence(state.spec, M - 1)
    rseq = transfer_sequence(state, M - 1)
    checks = []
    for i in range(1, M):
        if tuple(_in_s(strict_parameter(rseq, i), t)) != strict_parameter(seq, i):
            raise VerificationFailed(f"v_{i} != y_{i}", reference="v_i = y_i")
        D = _ladder_unit(seq, rseq, t, i)
        if monomial_value(seq, D) != 0:
            raise VerificationFailed(
                f"u_{i} / x_{i}^{t} has nonzero value", reference="u_i = x_i^t delta_i"
            )
        p, q = state.spec.pairs[i - 1]
        checks.append(
            LadderCheck(
                i=i,
                s_steps=euclid_data(p, q).epsilon,
                r_steps=euclid_data(p // t, q).epsilon,
                delta_residue=monomial_residue(seq, D),
            )
        )
        logger.debug("ladder checkpoint %d: residue %s", i, checks[-1].delta_residue)
    return tuple(checks)


def _local_state(state: ExtensionState, M: int) -> ExtensionState:
    """The state at checkpoint M - 1, where the chunk for level M starts."""
    t, P, spec = state.t, state.precision, state.spec
    i = M - 1
    seq = build_sequence(spec, M)
    rseq = transfer_sequence(state, i)
    _, coeffs = decompose_monomial(seq, _ladder_unit(seq, rseq, t, i), i)
    delta = unit_product(checkpoint_units(seq, i, P), coeffs, P)
    delta = delta / delta.constant_term
    p, q = spec.pairs[i]
    c = monomial_residue(
        seq, [q * a - p * b for a, b in zip(strict_parameter(seq, i), x_parameter(seq, i))]
    )
    mu = spec.mu / seq.Q[i]
    local_spec = ValuationSpec(spec.pairs[i:], (c, *spec.lambdas[i + 1 :]), mu)
    vy = mu * Fraction(p, q)
    s_depth = sum(euclid_data(*pair).epsilon for pair in spec.pairs[:i])
    r_depth = sum(euclid_data(pp // t, qq).epsilon for pp, qq in spec.pairs[:i])
    return ExtensionState(
        t=t,
        delta=delta,
        spec=local_spec,
        S_chart=Chart(depth=s_depth, values=(mu, vy), exceptional=(True, False)),
        R_chart=Chart(depth=r_depth, values=(t * mu, vy), exceptional=(True, False)),
        precision=P,
    )


def _shifted(c: Fraction, precision: int) -> PowerSeries:
    return PowerSeries({(0, 0): c, (0, 1): 1}, precision)


def _chart_images(y: PowerSeries, c: Fraction, p: int, q: int, a: int, b: int, P: int):
    shifted = y + c
    xs = (shifted**b).shift(q, 0).with_precision(P)
    ys = (shifted**a).shift(p, 0).with_precision(P)
    return xs, ys


def _solve_y(
    delta: PowerSeries, c: Fraction, p: int, q: int, a: int, b: int, pbar: int, tp: int, P: int
) -> PowerSeries:
    """Y' as a series in (X, V), from Y' + c = c [(1 + V / c^tp) delta_o^pbar]^(1/tp)."""
    V = PowerSeries({(0, 1): 1}, P)
    base = V * (1 / c**tp) + 1
    y = PowerSeries({}, P)
    for _ in range(P + 1):
        xs, ys = _chart_images(y, c, p, q, a, b, P)
        d_o = delta.compose(xs, ys).with_precision(P)
        new = ((base * d_o**pbar).power(Fraction(1, tp)) * c - c).with_precision(P)
        if new == y:
            return y
        y = new
    raise PrecisionExhausted(f"inverting V did not settle below precision {P}")


def chunk_step(state: ExtensionState) -> ExtensionState:
    """Run the composite steps for (p, q) on S and (p/g, q t/g) on R.

    With g = gcd(t, p), the charts reached satisfy U = X^g Delta and
    V = Y' up to a change of the second S-coordinate. The returned state
    has exponent g and Delta written in the coordinates (X, V).

    Raises:
        DomainError: If delta does not have constant term 1
        VerificationFailed: If an identity of the chunk fails below precision
        PrecisionExhausted: If a series needed for a check does not settle
    """
    t, P, spec = state.t, state.precision, state.spec
    if not spec.length:
        raise DomainError("a chunk needs at least one level")
    p, q = spec.pairs[0]
    c = spec.lambdas[0]
    delta = state.delta.with_precision(P)
    if delta.constant_term != 1:
        raise DomainError("rescale delta to constant term 1 before a chunk")
    g = gcd(t, p)
    tp, pbar = t // g, p // g
    qbar = q * tp
    ed, edr = euclid_data(p, q), euclid_data(pbar, qbar)
    a, b, abar, bbar = ed.a, ed.b, edr.a, edr.b
    if q * t * abar - p * bbar != g:
        raise VerificationFailed(
            f"U has X-order {q * t * abar - p * bbar}, expected {g}",
            reference="q t abar - p bbar = g",
        )
    cbar = c**tp
    next_value = (
        spec.mu * Fraction(spec.pairs[1][0], q * spec.pairs[1][1]) if spec.length > 1 else None
    )
    s_chain = composite_chain(state.S_chart, p, q, c, next_value)
    r_chain = composite_chain(state.R_chart, pbar, qbar, cbar, next_value)
    if r_chain[-1].values[0] != g * s_chain[-1].values[0]:
        raise VerificationFailed("v(U) != g v(X)", reference="U = X^g Delta")

    shifted = _shifted(c, P)
    xs, ys = _chart_images(PowerSeries({(0, 1): 1}, P), c, p, q, a, b, P)
    d_o = delta.compose(xs, ys).with_precision(P)
    Delta = (d_o**abar * shifted ** (b * t * abar - a * bbar)).with_precision(P)
    if not Delta.is_unit:
        raise VerificationFailed("Delta is not a unit", reference="U = X^g Delta")
    V = (shifted**tp * d_o ** (-pbar) - cbar).with_precision(P)
    if V.coefficient(0, 0) != 0 or V.coefficient(0, 1) == 0:
        raise VerificationFailed("V is not a parameter transversal to X", reference="V = Y")
    Vc = V + cbar
    if not (Delta**qbar * Vc**bbar).agrees_with(shifted ** (b * t) * d_o):
        raise VerificationFailed(
            "u differs from U^qbar (V + cbar)^bbar", reference="u = U^qbar (V + cbar)^bbar"
        )
    if not (Delta**pbar * Vc**abar).agrees_with(shifted**a):
        raise VerificationFailed(
            "v differs from U^pbar (V + cbar)^abar", reference="v = U^pbar (V + cbar)^abar"
        )

    y_of_v = _solve_y(delta, c, p, q, a, b, pbar, tp, P)
    X = PowerSeries.X()
    if not V.compose(X, y_of_v).agrees_with(PowerSeries.Y()):
        raise VerificationFailed("solving for Y' does not invert V", reference="V = Y")
    new_delta = Delta.compose(X, y_of_v).with_precision(P)

    report = ChunkReport(
        t=t,
        g=g,
        p=p,
        q=q,
        pbar=pbar,
        qbar=qbar,
        s_steps=ed.epsilon,
        r_steps=edr.epsilon,
        c=c,
        delta_residue=Delta.constant_term,
    )
    logger.info("chunk (%d, %d): t = %d -> g = %d", p, q, t, g)
    return ExtensionState(
        t=g,
        delta=new_delta,
        spec=spec.tail(1, spec.mu / q),
        S_chart=s_chain[-1],
        R_chart=r_chain[-1],
        precision=P,
        last_chunk=report,
    )


def _transferable_level(state: ExtensionState, bound: int) -> int:
    k = min(bound, state.spec.length)
    M = find_M(state.spec, state.t, k)
    return k if M is None else M - 1


def verify_toroidal(
    report: DescentReport, state: ExtensionState, level: int | None = None
) -> ToroidalCertificate:
    """Certify the final shape u = H_0^t gamma, v = H_1 at a finite level.

    Raises:
        VerificationFailed: If the root identity or the value-group check fails
    """
    t = report.final_t
    if state.t != t:
        raise VerificationFailed(f"state has t = {state.t}, report has {t}")
    k = _transferable_level(state, state.spec.length) if level is None else level
    delta = state.delta.with_precision(state.precision)
    root, alpha = adjoin_root(delta, t)
    if not (alpha**t * root**t).agrees_with(delta):
        raise VerificationFailed("rho^t alpha^t differs from delta", reference="u = H_0^t gamma")
    seq = build_sequence(state.spec, k)
    rseq = transfer_sequence(state, k)
    gcd_S = group_of(seq, seq.level) * state.spec.mu
    gcd_R = group_of(rseq, rseq.level) * rseq.spec.mu
    expected = state.spec.mu / seq.Q[k]
    if gcd_S != expected or gcd_R != t * expected:
        raise VerificationFailed(
            f"value groups generated by {gcd_S} and {gcd_R}, "
            f"expected {expected} and {t * expected}",
            reference="values of the transferred sequence generate the value group",
        )
    if report.classification is Classification.UNDETERMINED:
        case = None
    elif report.classification is Classification.NONDISCRETE:
        case = ValuationCase.NONDISCRETE
    else:
        case = ValuationCase.DISCRETE
    if case is ValuationCase.NONDISCRETE:
        generators = (f"u = H_0^{t} * gamma", "v = H_1")
    else:
        generators = (f"u = x^{t} * gamma",)
    return ToroidalCertificate(
        case=case,
        exponent=t,
        gamma_residue=delta.constant_term,
        generators=generators,
        level=report.verified_to_level,
        group_gcd_R=gcd_R,
        group_gcd_S=gcd_S,
        minimal_from=independent_subsequence(seq).minimal_from,
        caveat=f"verified to level {report.verified_to_level}",
    )


def descend(
    state: ExtensionState,
    level_bound: int = DEFAULT_MAX_LEVEL,
    step_bound: int = DEFAULT_STEP_BOUND,
) -> DescentReport:
    """Replace t by gcd(t, p_M) until t divides every p_i up to the level bound.

    Args:
        state: Initial extension state, usually from ``extension_state``
        level_bound: Highest level the search for M looks at
        step_bound: Most chunk steps allowed

    Returns:
        DescentReport with one iteration per chunk and the toroidal certificate

    Raises:
        PrecisionExhausted: If the state's precision is below ``required_precision``
        StepBoundExceeded: If more than ``step_bound`` iterations are needed
        UnitRootNotRational: If the constant of delta has no rational t-th root
    """
    needed = required_precision(state.t, state.spec, level_bound)
    if state.precision < needed:
        raise PrecisionExhausted(
            f"precision {state.precision} is below the required {needed}",
            reference="precision > largest checked exponent",
        )
    original = state.spec
    iterations: list[DescentIteration] = []
    consumed = 0
    current = state
    for _ in range(step_bound):
        delta = current.delta.with_precision(current.precision)
        adjoin_root(delta, current.t)
        current = replace(current, delta=delta / delta.constant_term)
        level = max(0, min(level_bound - consumed, current.spec.length))
        M = find_M(current.spec, current.t, level)
        if M is None:
            transfer_sequence(current, level)
            iterations.append(DescentIteration(current.t, None, current.t, 0, 0))
            report = DescentReport(
                iterations=tuple(iterations),
                final_t=current.t,
                classification=classify(original, consumed + level),
                verified_to_level=consumed + level,
                final_state=current,
            )
            certificate = verify_toroidal(report, current, level)
            logger.info(
                "descent finished with t = %d after %d iterations", current.t, len(iterations)
            )
            return replace(report, certificate=certificate)
        logger.debug("t = %d: obstruction at level %d", current.t, M)
        ladder = verify_ladder(current, M)
        local = _local_state(current, M) if M > 1 else current
        nxt = chunk_step(local)
        chunk = nxt.last_chunk
        if not nxt.t < current.t or nxt.t != gcd(current.t, current.spec.pairs[M - 1][0]):
            raise VerificationFailed(
                f"t went from {current.t} to {nxt.t}", reference="t_new = gcd(t, p_M) < t"
            )
        iterations.append(
            DescentIteration(
                t=current.t,
                M=M,
                g=nxt.t,
                s_steps=sum(c.s_steps for c in ladder) + chunk.s_steps,
                r_steps=sum(c.r_steps for c in ladder) + chunk.r_steps,
                ladder=ladder,
                chunk=chunk,
            )
        )
        consumed += M
        current = nxt
    raise StepBoundExceeded(
        f"descent did not finish within {step_bound} iterations", reference="t strictly decreases"
    )
