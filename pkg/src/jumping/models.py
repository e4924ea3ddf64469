"""Data models for jumping-polynomials."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from math import gcd, prod
from typing import TYPE_CHECKING

from .errors import DomainError

if TYPE_CHECKING:
    from .poly import BiPoly, PowerSeries, SubstitutionMap

DEFAULT_MAX_LEVEL = 6
DEFAULT_PRECISION = 12
DEFAULT_STEP_BOUND = 10


class Classification(Enum):
    """Discreteness of a finite spec, judged from the levels it provides."""

    DISCRETE = "discrete"
    NONDISCRETE = "nondiscrete-at-level"
    UNDETERMINED = "undetermined"


class ValuationCase(Enum):
    """The five shapes a monomialized extension can take."""

    DIVISORIAL = "divisorial"
    RANK_TWO = "rank-2"
    RATIONAL_RANK_TWO = "rational-rank-2"
    NONDISCRETE = "nondiscrete"
    DISCRETE = "discrete-not-divisorial"


class StepCase(Enum):
    """Which chart a quadratic transform picks, by comparing coordinate values."""

    A = "a"  # v(x) < v(y): y -> y/x
    B = "b"  # v(x) > v(y): x -> x/y
    C = "c"  # equal values: y -> y/x - c


@dataclass(frozen=True)
class EuclidData:
    """Division data of the Euclidean algorithm on (p, q)."""

    p: int
    q: int
    N: int
    f: tuple[int, ...]
    F: tuple[int, ...]
    epsilon: int
    a: int
    b: int


@dataclass(frozen=True)
class ValueGroupLevel:
    """Generators beta_0..beta_k and exponents q_1..q_k of a level of the value group."""

    k: int
    betas: tuple[Fraction, ...]
    qs: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "betas", tuple(Fraction(b) for b in self.betas))
        object.__setattr__(self, "qs", tuple(int(q) for q in self.qs))
        if len(self.betas) != self.k + 1 or len(self.qs) != self.k:
            raise DomainError(
                f"level {self.k} needs {self.k + 1} generators and {self.k} exponents"
            )
        if any(q < 1 for q in self.qs):
            raise DomainError("exponents q_i must be positive")
        if self.betas[0] <= 0:
            raise DomainError("beta_0 must be positive")
        if (self.Qk * self.betas[-1]).denominator != 1:
            raise DomainError(f"Q_k * beta_k = {self.Qk * self.betas[-1]} is not an integer")

    @property
    def Qk(self) -> int:
        return prod(self.qs)


@dataclass(frozen=True)
class ValuationSpec:
    """Defining data (p_i, q_i, lambda_i) of a valuation, with mu = value of x."""

    pairs: tuple[tuple[int, int], ...]
    lambdas: tuple[Fraction, ...]
    mu: Fraction = Fraction(1)

    def __post_init__(self):
        object.__setattr__(self, "pairs", tuple((int(p), int(q)) for p, q in self.pairs))
        object.__setattr__(self, "lambdas", tuple(Fraction(c) for c in self.lambdas))
        object.__setattr__(self, "mu", Fraction(self.mu))
        if len(self.pairs) != len(self.lambdas):
            raise DomainError(
                f"{len(self.pairs)} pairs but {len(self.lambdas)} lambdas"
            )
        for i, (p, q) in enumerate(self.pairs, start=1):
            if p < 1 or q < 1:
                raise DomainError(f"pair {i} = ({p}, {q}) must be positive")
            if gcd(p, q) != 1:
                raise DomainError(f"pair {i} = ({p}, {q}) is not coprime")
        for i, lam in enumerate(self.lambdas, start=1):
            if lam == 0:
                raise DomainError(f"lambda_{i} must be nonzero")
        if self.mu <= 0:
            raise DomainError("mu must be positive")

    @property
    def length(self) -> int:
        return len(self.pairs)

    @property
    def ps(self) -> tuple[int, ...]:
        return tuple(p for p, _ in self.pairs)

    @property
    def qs(self) -> tuple[int, ...]:
        return tuple(q for _, q in self.pairs)

    def truncated(self, k: int) -> ValuationSpec:
        return ValuationSpec(self.pairs[:k], self.lambdas[:k], self.mu)

    def tail(self, start: int, mu: Fraction) -> ValuationSpec:
        """Data from level start + 1 on, renormalized so that mu is the new x value."""
        return ValuationSpec(self.pairs[start:], self.lambdas[start:], mu)


@dataclass(frozen=True)
class JumpingSequence:
    """Jumping polynomials T_0..T_{k+1} with their values and exponent rows.

    ``beta`` uses the scale v(x) = 1; multiply by ``spec.mu`` for reported values.
    """

    spec: ValuationSpec
    T: tuple[BiPoly, ...]
    beta: tuple[Fraction, ...]
    Q: tuple[int, ...]
    n_rows: tuple[tuple[int, ...], ...]
    d: tuple[int, ...]

    @property
    def level(self) -> int:
        return len(self.beta) - 1

    def p(self, i: int) -> int:
        return self.spec.pairs[i - 1][0]

    def q(self, i: int) -> int:
        return self.spec.pairs[i - 1][1]

    def lam(self, i: int) -> Fraction:
        return self.spec.lambdas[i - 1]

    def row(self, i: int) -> tuple[int, ...]:
        """Exponents n_{i,0}..n_{i,i-1} of the monomial subtracted to form T_{i+1}."""
        return self.n_rows[i - 1]

    def value(self, i: int) -> Fraction:
        return self.beta[i] * self.spec.mu

    def level_data(self, k: int) -> ValueGroupLevel:
        return ValueGroupLevel(k, self.beta[: k + 1], tuple(self.q(i) for i in range(1, k + 1)))


@dataclass(frozen=True)
class IndependentData:
    """The subsequence H_l = T_{i_l} of jumping polynomials with q_{i_l} > 1.

    Per-level lists (qbar, pbar, rows) are indexed from l = 1; betabar and
    Qbar start at l = 0.
    """

    indices: tuple[int, ...]
    H: tuple[BiPoly, ...]
    qbar: tuple[int, ...]
    pbar: tuple[int, ...]
    betabar: tuple[Fraction, ...]
    Qbar: tuple[int, ...]
    rows: tuple[tuple[int, ...], ...]
    intermediate: tuple[tuple[int, int, tuple[int, ...]], ...] = ()
    minimal_from: int = 0


@dataclass(frozen=True)
class ExpansionTerm:
    exponents: tuple[int, ...]
    coefficient: Fraction
    value: Fraction


@dataclass(frozen=True)
class Expansion:
    """A polynomial written as a sum of monomials in T_0..T_k."""

    level: int
    terms: tuple[ExpansionTerm, ...]

    @property
    def min_value(self) -> Fraction | None:
        return min((t.value for t in self.terms), default=None)

    def minimal_terms(self) -> tuple[ExpansionTerm, ...]:
        low = self.min_value
        return tuple(t for t in self.terms if t.value == low)


@dataclass(frozen=True)
class CriterionFailure:
    condition: int
    index: int
    detail: str


@dataclass(frozen=True)
class CriterionReport:
    """Outcome of the three-condition generating-sequence criterion."""

    gammas: tuple[Fraction, ...]
    failures: tuple[CriterionFailure, ...] = ()

    @property
    def holds(self) -> bool:
        return not self.failures

    def __bool__(self) -> bool:
        return self.holds

    def failed_conditions(self) -> set[int]:
        return {f.condition for f in self.failures}


@dataclass(frozen=True)
class Chart:
    """One local ring in a chain of quadratic transforms.

    ``frame`` writes the chart coordinates as Laurent monomials in the
    coordinates of the last frame (the base, or the last checkpoint).
    ``exceptional`` flags which coordinates vanish on the exceptional divisor.
    The second value is None past the last level the spec describes.
    """

    depth: int
    values: tuple[Fraction, Fraction | None]
    exceptional: tuple[bool, bool]
    case: StepCase | None = None
    frame: tuple[tuple[int, int], tuple[int, int]] = ((1, 0), (0, 1))
    residue: Fraction | None = None
    map_to_base: SubstitutionMap | None = None

    def __post_init__(self):
        v0, v1 = self.values
        if v0 <= 0 or (v1 is not None and v1 <= 0):
            raise DomainError(f"chart coordinates must have positive values, got {self.values}")

    @property
    def free(self) -> bool:
        return self.exceptional.count(True) == 1

    @property
    def exceptional_is_x(self) -> bool | None:
        if not self.free:
            return None
        return self.exceptional[0]


@dataclass(frozen=True)
class Checkpoint:
    """Chart k_i of the chain, where x_i is exceptional with value mu / Q_i."""

    i: int
    k: int
    chart_index: int
    residue: Fraction
    lam: Fraction
    verified: bool = True


@dataclass(frozen=True)
class FreePattern:
    """Maximal runs of free charts: run l spans s_prime[l-1]..s_bar[l-1].

    A run still open at the end of the trace has no entry in ``s_bar``.
    """

    s_prime: tuple[int, ...]
    s_bar: tuple[int, ...]


@dataclass(frozen=True)
class TransformTrace:
    spec: ValuationSpec
    level: int
    charts: tuple[Chart, ...]
    checkpoints: tuple[Checkpoint, ...]
    free_runs: FreePattern
    precision: int | None = None

    def checkpoint(self, i: int) -> Checkpoint:
        return self.checkpoints[i]

    def chart_at(self, i: int) -> Chart:
        return self.charts[self.checkpoints[i].chart_index]


@dataclass(frozen=True)
class FactorizationRecord:
    j: int
    order: int
    expected: int
    unit: bool


@dataclass(frozen=True)
class FactorizationReport:
    i: int
    records: tuple[FactorizationRecord, ...]
    strict_transform_ok: bool


@dataclass(frozen=True)
class ExtensionState:
    """An extension R in S in the normal form u = x^t delta, v = y.

    ``spec`` describes the valuation on S[delta^(1/t)] with T_0 = x delta^(1/t).
    """

    t: int
    delta: PowerSeries
    spec: ValuationSpec
    S_chart: Chart
    R_chart: Chart
    precision: int
    last_chunk: ChunkReport | None = None


@dataclass(frozen=True)
class LadderCheck:
    """u_i = x_i^t delta_i and v_i = y_i at checkpoint i below the obstruction."""

    i: int
    s_steps: int
    r_steps: int
    delta_residue: Fraction


@dataclass(frozen=True)
class ChunkReport:
    t: int
    g: int
    p: int
    q: int
    pbar: int
    qbar: int
    s_steps: int
    r_steps: int
    c: Fraction
    delta_residue: Fraction


@dataclass(frozen=True)
class DescentIteration:
    t: int
    M: int | None
    g: int
    s_steps: int
    r_steps: int
    ladder: tuple[LadderCheck, ...] = ()
    chunk: ChunkReport | None = None


@dataclass(frozen=True)
class ToroidalCertificate:
    """Final monomial shape of the extension, verified to a finite level."""

    case: ValuationCase | None
    exponent: int
    gamma_residue: Fraction
    generators: tuple[str, ...]
    level: int
    group_gcd_R: Fraction
    group_gcd_S: Fraction
    minimal_from: int
    caveat: str


@dataclass(frozen=True)
class DescentReport:
    iterations: tuple[DescentIteration, ...]
    final_t: int
    classification: Classification
    verified_to_level: int
    final_state: ExtensionState | None = field(default=None, repr=False)
    certificate: ToroidalCertificate | None = None
