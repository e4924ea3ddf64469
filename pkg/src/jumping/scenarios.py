"""Scenario files: schema, execution, verification and random generation.

A scenario names a kind of computation, its JSON payload and optional
bounds. ``run`` returns a JSON-ready report whose rationals are already
rendered as "num/den" strings, so equal scenarios give byte-identical
output.
"""

from __future__ import annotations

import logging
import random
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from functools import partial
from math import gcd, prod
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, PositiveInt, ValidationError

from .arithmetic import format_rational, order_in_quotient, parse_rational
from .errors import DomainError, JumpingError, VerificationFailed
from .models import (
    DEFAULT_MAX_LEVEL,
    DEFAULT_PRECISION,
    DEFAULT_STEP_BOUND,
    DescentReport,
    ExtensionState,
    JumpingSequence,
    TransformTrace,
    ValuationSpec,
)
from .monomialization import check_xpowers, descend, extension_state, required_precision
from .poly import BiPoly, PowerSeries, poly_from_json, poly_to_json
from .sequence import (
    build_sequence,
    classify,
    group_of,
    independent_subsequence,
    value,
    verify_spivakovsky,
)
from .transforms import (
    checkpoint_precision,
    pullback_precision,
    pullback_value_oracle,
    run_to_level,
    verify_chart_identity,
)

logger = logging.getLogger(__name__)

Kind = Literal["genseq", "value", "transform", "monomialize", "verify"]
PROFILES = ("arithmetic", "genseq", "transform", "descent")

# generator caps
MAX_Q = 7
MAX_P = 11
MAX_LEVELS = 6
MAX_T = 12
LAMBDAS = (Fraction(1), Fraction(2), Fraction(-1), Fraction(1, 2), Fraction(3))


class PolyModel(BaseModel):
    """Polynomial as a list of [i, j, "num/den"] terms."""

    model_config = ConfigDict(extra="forbid")

    terms: list[tuple[int, int, str | int]]

    def to_poly(self) -> BiPoly:
        return poly_from_json({"terms": [list(t) for t in self.terms]})

    @classmethod
    def from_poly(cls, f: BiPoly) -> PolyModel:
        return cls.model_validate(poly_to_json(f))


class SpecModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    pairs: list[tuple[PositiveInt, PositiveInt]]
    lambdas: list[str | int]
    mu: str | int = "1/1"

    def to_spec(self) -> ValuationSpec:
        return ValuationSpec(
            tuple(self.pairs),
            tuple(parse_rational(c) for c in self.lambdas),
            parse_rational(self.mu),
        )

    @classmethod
    def from_spec(cls, spec: ValuationSpec) -> SpecModel:
        return cls(
            pairs=list(spec.pairs),
            lambdas=[format_rational(c) for c in spec.lambdas],
            mu=format_rational(spec.mu),
        )


class Bounds(BaseModel):
    model_config = ConfigDict(extra="forbid")

    max_level: PositiveInt | None = None
    precision: PositiveInt | None = None
    step_bound: PositiveInt | None = None

    def over(self, other: Bounds) -> Bounds:
        """These bounds where set, ``other`` elsewhere."""
        return Bounds(
            max_level=self.max_level if self.max_level is not None else other.max_level,
            precision=self.precision if self.precision is not None else other.precision,
            step_bound=self.step_bound if self.step_bound is not None else other.step_bound,
        )

    def resolved(self) -> tuple[int, int | None, int]:
        """Bounds with defaults filled in; precision stays None so runs can plan it."""
        return (
            self.max_level or DEFAULT_MAX_LEVEL,
            self.precision,
            self.step_bound or DEFAULT_STEP_BOUND,
        )


class GenseqPayload(BaseModel):
    model_config = ConfigDict(extra="forbid")

    spec: SpecModel
    level: PositiveInt | None = None


class ValuePayload(BaseModel):
    model_config = ConfigDict(extra="forbid")

    spec: SpecModel
    f: PolyModel


class TransformPayload(BaseModel):
    model_config = ConfigDict(extra="forbid")

    spec: SpecModel
    level: int | None = Field(default=None, ge=0)


class MonomializePayload(BaseModel):
    model_config = ConfigDict(extra="forbid")

    t: PositiveInt
    delta: PolyModel
    spec: SpecModel
    level_bound: PositiveInt | None = None
    step_bound: PositiveInt | None = None
    precision: PositiveInt | None = None

    def bounds(self) -> Bounds:
        return Bounds(
            max_level=self.level_bound, precision=self.precision, step_bound=self.step_bound
        )


class VerifyPayload(BaseModel):
    model_config = ConfigDict(extra="forbid")

    scenarios: list[Scenario]


class Scenario(BaseModel):
    model_config = ConfigDict(extra="forbid")

    kind: Kind
    payload: dict[str, Any]
    bounds: Bounds = Bounds()
    rng_seed: int | None = None

    def parsed(self) -> BaseModel:
        """The payload validated against the schema of its kind.

        Raises:
            DomainError: If the payload does not match the schema
        """
        try:
            return PAYLOADS[self.kind].model_validate(self.payload)
        except ValidationError as e:
            raise DomainError(f"invalid {self.kind} payload: {e}") from e


PAYLOADS: dict[str, type[BaseModel]] = {
    "genseq": GenseqPayload,
    "value": ValuePayload,
    "transform": TransformPayload,
    "monomialize": MonomializePayload,
    "verify": VerifyPayload,
}

VerifyPayload.model_rebuild()


def load_scenario(data: Any) -> Scenario:
    """Validate a decoded JSON document as a scenario.

    Raises:
        DomainError: If the document does not match the schema
    """
    try:
        scenario = Scenario.model_validate(data)
    except ValidationError as e:
        raise DomainError(f"invalid scenario: {e}") from e
    scenario.parsed()
    return scenario


def _r(x: Fraction | int) -> str:
    return format_rational(x)


def sequence_report(seq: JumpingSequence) -> dict:
    mu = seq.spec.mu
    ind = independent_subsequence(seq)
    criterion = verify_spivakovsky(ind)
    return {
        "kind": "genseq",
        "level": seq.level,
        "T": [poly_to_json(T) for T in seq.T],
        "beta": [_r(b * mu) for b in seq.beta],
        "Q": list(seq.Q),
        "n_rows": [list(row) for row in seq.n_rows],
        "d": list(seq.d),
        "classification": classify(seq.spec, seq.level).value,
        "independent": {
            "indices": list(ind.indices),
            "qbar": list(ind.qbar),
            "pbar": list(ind.pbar),
            "betabar": [_r(b * mu) for b in ind.betabar],
            "minimal_from": ind.minimal_from,
        },
        "criterion": {
            "holds": criterion.holds,
            "failures": [
                {"condition": f.condition, "index": f.index, "detail": f.detail}
                for f in criterion.failures
            ],
        },
    }


def trace_report(trace: TransformTrace) -> dict:
    return {
        "kind": "transform",
        "level": trace.level,
        "precision": trace.precision,
        "charts": [
            {
                "depth": ch.depth,
                "case": ch.case.value if ch.case else None,
                "values": [None if v is None else _r(v) for v in ch.values],
                "free": ch.free,
            }
            for ch in trace.charts
        ],
        "checkpoints": [
            {"i": cp.i, "k_i": cp.k, "verified": cp.verified, "residue": _r(cp.residue)}
            for cp in trace.checkpoints
        ],
        "free_runs": {
            "s_prime": list(trace.free_runs.s_prime),
            "s_bar": list(trace.free_runs.s_bar),
        },
    }


def descent_report(report: DescentReport) -> dict:
    cert = report.certificate
    return {
        "kind": "monomialize",
        "iterations": [
            {
                "t": it.t,
                "M": it.M,
                "g": it.g,
                "s_steps": it.s_steps,
                "r_steps": it.r_steps,
                "ladder": [
                    {"i": c.i, "delta_residue": _r(c.delta_residue)} for c in it.ladder
                ],
            }
            for it in report.iterations
        ],
        "final_t": report.final_t,
        "ramification": report.final_t,
        "classification": report.classification.value,
        "verified_to_level": report.verified_to_level,
        "certificate": None
        if cert is None
        else {
            "case": cert.case.value if cert.case else None,
            "exponent": cert.exponent,
            "generators": list(cert.generators),
            "group_gcd_R": _r(cert.group_gcd_R),
            "group_gcd_S": _r(cert.group_gcd_S),
            "minimal_from": cert.minimal_from,
            "caveat": cert.caveat,
        },
    }


def _bounds(scenario: Scenario, overrides: Bounds | None) -> tuple[int, int | None, int]:
    bounds = scenario.bounds
    payload = scenario.parsed()
    if isinstance(payload, MonomializePayload):
        bounds = payload.bounds().over(bounds)
    if overrides is not None:
        bounds = overrides.over(bounds)
    return bounds.resolved()


def run(scenario: Scenario, overrides: Bounds | None = None) -> dict:
    """Execute a scenario and return its JSON-ready report.

    Args:
        scenario: A loaded scenario
        overrides: Bounds from the command line, taking precedence over the scenario

    Returns:
        Report dict with rationals as "num/den" strings

    Raises:
        JumpingError: Whatever the underlying operation raises
    """
    max_level, precision, step_bound = _bounds(scenario, overrides)
    payload = scenario.parsed()
    logger.info("running %s scenario", scenario.kind)
    if isinstance(payload, GenseqPayload):
        spec = payload.spec.to_spec()
        level = min(payload.level or spec.length, spec.length, max_level)
        return sequence_report(build_sequence(spec, level))
    if isinstance(payload, ValuePayload):
        f = payload.f.to_poly()
        return {
            "kind": "value",
            "f": poly_to_json(f),
            "value": _r(value(f, payload.spec.to_spec(), max_level)),
        }
    if isinstance(payload, TransformPayload):
        spec = payload.spec.to_spec()
        level = spec.length if payload.level is None else payload.level
        return trace_report(run_to_level(spec, min(level, max_level), precision))
    if isinstance(payload, MonomializePayload):
        state = _initial_state(payload, precision)
        return descent_report(descend(state, max_level, step_bound))
    return {"kind": "verify", "results": verify_all(payload.scenarios, overrides=overrides)}


def _initial_state(payload: MonomializePayload, precision: int | None) -> ExtensionState:
    spec = payload.spec.to_spec()
    if precision is None:
        precision = max(DEFAULT_PRECISION, required_precision(payload.t, spec))
    return extension_state(
        payload.t, PowerSeries.from_poly(payload.delta.to_poly()), spec, precision
    )


def _check(condition: bool, message: str, reference: str) -> None:
    if not condition:
        raise VerificationFailed(message, reference=reference)


def _verify_sequence(spec: ValuationSpec, max_level: int) -> list[str]:
    seq = build_sequence(spec, min(spec.length, max_level))
    k = seq.level
    for i in range(1, k + 1):
        q = seq.q(i)
        _check(
            (seq.Q[i] * seq.beta[i]).denominator == 1,
            f"Q_{i} beta_{i} not integral",
            "Q_i beta_i in Z",
        )
        _check(
            seq.T[i].degree_y == seq.Q[i - 1],
            f"deg_y T_{i} != Q_{i - 1}",
            "deg_y T_i = Q_{i-1}",
        )
        _check(value(seq.T[i], seq) == seq.value(i), f"value(T_{i}) != beta_{i}", "v(T_i) = beta_i")
        if i < k:
            _check(
                seq.beta[i + 1] > q * seq.beta[i],
                f"beta_{i + 1} <= q_{i} beta_{i}",
                "beta_{i+1} > q_i beta_i",
            )
        if q > 1:
            prev = seq.level_data(i - 1)
            _check(
                order_in_quotient(q, q * seq.beta[i], prev) == q,
                f"q_{i} beta_{i} has the wrong order",
                "order of q_k beta_k is q_k",
            )
    _check(
        group_of(seq, k) == Fraction(1, seq.Q[k]),
        "group gcd != 1/Q_k",
        "(beta_0..beta_k) = 1/Q_k",
    )
    if k:
        _check(
            check_xpowers(seq, k),
            "x-exponent not a multiple of d_k",
            "x-exponents are multiples of d_k",
        )
    _check(
        verify_spivakovsky(independent_subsequence(seq)).holds,
        "criterion fails",
        "generating-sequence criterion",
    )
    return ["sequence", "values", "group", "xpowers", "criterion"]


def _verify(scenario: Scenario, overrides: Bounds | None) -> list[str]:
    max_level, precision, step_bound = _bounds(scenario, overrides)
    payload = scenario.parsed()
    if isinstance(payload, GenseqPayload):
        return _verify_sequence(payload.spec.to_spec(), min(payload.level or max_level, max_level))
    if isinstance(payload, ValuePayload):
        spec = payload.spec.to_spec()
        f = payload.f.to_poly()
        v = value(f, spec, max_level)
        level = min(spec.length, max_level)
        if precision is None:
            seq = build_sequence(spec, level)
            order = seq.Q[level] * v / spec.mu
            precision = max(
                DEFAULT_PRECISION,
                checkpoint_precision(spec, level),
                pullback_precision(f, seq, level, order),
            )
        trace = run_to_level(spec, level, precision)
        oracle, certified = pullback_value_oracle(f, trace, level)
        if certified:
            _check(oracle == v, f"oracle {oracle} != value {v}", "pullback order agrees with value")
        return ["value", "oracle" if certified else "oracle-uncertified"]
    if isinstance(payload, TransformPayload):
        spec = payload.spec.to_spec()
        level = min(spec.length if payload.level is None else payload.level, max_level)
        for p, q in spec.pairs[:level]:
            verify_chart_identity(p, q, Fraction(1))
        run_to_level(spec, level, precision)
        return ["chart-identities", "checkpoints", "factorizations", "free-runs"]
    if isinstance(payload, MonomializePayload):
        state = _initial_state(payload, precision)
        report = descend(state, max_level, step_bound)
        ts = [it.t for it in report.iterations]
        _check(
            all(a > b for a, b in zip(ts, ts[1:])),
            f"t sequence {ts} does not decrease",
            "t strictly decreases",
        )
        return ["descent", "toroidal"]
    results = verify_all(payload.scenarios, overrides=overrides)
    _check(all(r["ok"] for r in results), "a nested scenario failed", "all scenarios verify")
    return ["nested"]


def verify_scenario(scenario: Scenario, overrides: Bounds | None = None, index: int = 0) -> dict:
    """Run the property checks for one scenario and report instead of raising."""
    try:
        checks = _verify(scenario, overrides)
    except JumpingError as e:
        logger.info("scenario %d failed: %s", index, e.message)
        return {
            "index": index,
            "kind": scenario.kind,
            "ok": False,
            "checks": [],
            "error": e.to_dict(),
        }
    return {"index": index, "kind": scenario.kind, "ok": True, "checks": checks, "error": None}


def _verify_indexed(item: tuple[int, Scenario], overrides: Bounds | None) -> dict:
    index, scenario = item
    return verify_scenario(scenario, overrides, index)


def verify_all(
    scenarios: list[Scenario], jobs: int = 1, overrides: Bounds | None = None
) -> list[dict]:
    """Verify scenarios in order, optionally in a process pool; results keep input order."""
    items = list(enumerate(scenarios))
    worker = partial(_verify_indexed, overrides=overrides)
    if jobs > 1 and len(items) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as executor:
            results = list(executor.map(worker, items))
    else:
        results = [worker(item) for item in items]
    return sorted(results, key=lambda r: r["index"])


def _coprime_pair(rng: random.Random, p_max: int, q_max: int) -> tuple[int, int]:
    while True:
        p, q = rng.randint(1, p_max), rng.randint(1, q_max)
        if gcd(p, q) == 1:
            return p, q


def random_spec(
    rng: random.Random,
    levels: int,
    p_max: int = MAX_P,
    q_max: int = MAX_Q,
    Q_max: int = 36,
    lambdas: tuple[Fraction, ...] = LAMBDAS,
) -> ValuationSpec:
    """Random spec with Q_k kept at most ``Q_max`` so the polynomials stay small."""
    pairs: list[tuple[int, int]] = []
    for _ in range(levels):
        room = Q_max // prod(q for _, q in pairs)
        pairs.append(_coprime_pair(rng, p_max, max(1, min(q_max, room))))
    return ValuationSpec(tuple(pairs), tuple(rng.choice(lambdas) for _ in pairs))


DELTAS = (
    BiPoly.one(),
    BiPoly({(0, 0): 1, (1, 0): 1}),
    BiPoly({(0, 0): 1, (0, 1): 1}),
    BiPoly({(0, 0): 1, (1, 0): 1, (0, 2): 1}),
)


def _scenario(kind: str, payload: BaseModel, seed: int, bounds: Bounds | None = None) -> Scenario:
    return Scenario(
        kind=kind,
        payload=payload.model_dump(mode="json"),
        bounds=bounds or Bounds(),
        rng_seed=seed,
    )


def generate(seed: int, profile: str) -> Scenario:
    """A reproducible random scenario within the generator caps.

    The arithmetic profile yields genseq scenarios, genseq yields value
    scenarios for products of jumping polynomials, transform yields
    transform scenarios and descent yields monomialize scenarios whose
    exponent is obstructed at some level.

    Raises:
        DomainError: For an unknown profile
    """
    if profile not in PROFILES:
        raise DomainError(f"unknown profile {profile!r}; expected one of {', '.join(PROFILES)}")
    rng = random.Random(f"{profile}:{seed}")
    if profile == "arithmetic":
        spec = random_spec(rng, rng.randint(1, MAX_LEVELS))
        return _scenario("genseq", GenseqPayload(spec=SpecModel.from_spec(spec)), seed)
    if profile == "genseq":
        spec = random_spec(rng, rng.randint(1, 3), q_max=3, Q_max=6)
        seq = build_sequence(spec)
        f = BiPoly.x() ** rng.randint(0, 2)
        for _ in range(rng.randint(1, 2)):
            f = f * seq.T[rng.randint(1, seq.level)]
        return _scenario(
            "value",
            ValuePayload(spec=SpecModel.from_spec(spec), f=PolyModel.from_poly(f)),
            seed,
        )
    if profile == "transform":
        spec = random_spec(rng, rng.randint(1, 2), p_max=7, q_max=3, Q_max=6)
        return _scenario("transform", TransformPayload(spec=SpecModel.from_spec(spec)), seed)
    t = rng.randint(2, MAX_T)
    spec = random_spec(rng, rng.randint(1, 3), q_max=3, Q_max=6, lambdas=(Fraction(1),))
    if all(p % t == 0 for p in spec.ps):
        pairs = list(spec.pairs)
        p, q = pairs[-1]
        p = next(c for c in range(1, MAX_P + 1) if c % t and gcd(c, q) == 1)
        pairs[-1] = (p, q)
        spec = ValuationSpec(tuple(pairs), spec.lambdas)
    payload = MonomializePayload(
        t=t,
        delta=PolyModel.from_poly(rng.choice(DELTAS)),
        spec=SpecModel.from_spec(spec),
        precision=max(DEFAULT_PRECISION, required_precision(t, spec)),
    )
    return _scenario("monomialize", payload, seed)
