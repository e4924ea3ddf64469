"""Tests for the descent of the ramification exponent."""

from dataclasses import replace
from fractions import Fraction
from math import gcd

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jumping.arithmetic import euclid_data
from jumping.errors import (
    DomainError,
    ObstructionPresent,
    PrecisionExhausted,
    StepBoundExceeded,
    UnitRootNotRational,
)
from jumping.models import Classification, ValuationCase, ValuationSpec
from jumping.monomialization import (
    adjoin_root,
    check_xpowers,
    chunk_step,
    descend,
    extension_state,
    find_M,
    required_precision,
    transfer_sequence,
    verify_ladder,
)
from jumping.poly import BiPoly, PowerSeries
from jumping.scenarios import generate
from jumping.sequence import build_sequence

x, y = BiPoly.x(), BiPoly.y()

DELTAS = [
    PowerSeries.one(),
    PowerSeries({(0, 0): 1, (1, 0): 1}),
    PowerSeries({(0, 0): 1, (0, 1): 1}),
    PowerSeries({(0, 0): 1, (1, 0): 1, (0, 2): 1}),
]


def state(t, pairs, delta=None, precision=16):
    spec = ValuationSpec(tuple(pairs), (1,) * len(pairs))
    return extension_state(t, delta or PowerSeries.one(), spec, precision)


class TestAdjoinRoot:
    """Tests for adjoin_root."""

    def test_rescaled_root(self):
        """4 + 4Y splits as 2^2 times the square of a unit."""
        delta = PowerSeries({(0, 0): 4, (0, 1): 4}, 6)
        root, alpha = adjoin_root(delta, 2)
        assert root == 2
        assert (alpha**2).agrees_with(PowerSeries({(0, 0): 1, (0, 1): 1}))

    def test_irrational_constant(self):
        """2 has no rational square root."""
        with pytest.raises(UnitRootNotRational):
            adjoin_root(PowerSeries.constant(2, 6), 2)

    def test_non_unit_state(self, spec_53):
        """delta must be a unit."""
        with pytest.raises(DomainError):
            extension_state(2, PowerSeries.X(), spec_53)


class TestFindM:
    """Tests for find_M."""

    PAIRS = ((4, 3), (2, 3), (5, 2))

    @pytest.mark.parametrize("t,bound,expected", [(2, 3, 3), (2, 2, None), (1, 3, None), (4, 3, 2)])
    def test_first_obstruction(self, t, bound, expected):
        """M is the first level whose p_i is not divisible by t."""
        spec = ValuationSpec(self.PAIRS, (1, 1, 1))
        assert find_M(spec, t, bound) == expected


class TestTransfer:
    """Tests for transfer_sequence and check_xpowers."""

    def test_even_spec(self, spec_even):
        """With every p_i even, t = 2 halves the p_i and doubles mu."""
        rseq = transfer_sequence(extension_state(2, PowerSeries.one(), spec_even), 2)
        assert rseq.spec.pairs == ((2, 3), (1, 5))
        assert rseq.spec.mu == 2
        seq = build_sequence(spec_even)
        assert all(rseq.T[i].subs(x**2, y) == seq.T[i] for i in range(1, 4))

    def test_identity_transfer(self, spec_53_12):
        """t = 1 transfers the sequence unchanged."""
        rseq = transfer_sequence(extension_state(1, PowerSeries.one(), spec_53_12), 2)
        assert rseq.T == build_sequence(spec_53_12).T

    def test_obstruction(self, spec_53_12):
        """t = 3 is obstructed at level 1 since 3 does not divide 5."""
        with pytest.raises(ObstructionPresent) as exc_info:
            transfer_sequence(extension_state(3, PowerSeries.one(), spec_53_12), 2)
        assert exc_info.value.M == 1
        assert exc_info.value.t == 3

    def test_xpowers(self):
        """Every x-exponent of T_2 is a multiple of d_2."""
        seq = build_sequence(ValuationSpec(((6, 5), (3, 2)), (1, 1)))
        assert seq.d == (6, 3)
        assert check_xpowers(seq, 2)

    def test_xpowers_tampered(self):
        """An extra x^5 y term breaks the x-power condition."""
        seq = build_sequence(ValuationSpec(((6, 5), (3, 2)), (1, 1)))
        T = list(seq.T)
        T[2] = T[2] + x**5 * y
        assert not check_xpowers(replace(seq, T=tuple(T)), 2)

    def test_xpowers_trivial_gcd(self, seq_53_12):
        """With d_k = 1 the condition always holds."""
        assert check_xpowers(seq_53_12, 2)

    @settings(max_examples=30, deadline=None)
    @given(
        st.sampled_from([2, 3]),
        st.lists(
            st.tuples(st.integers(1, 4), st.sampled_from([1, 5, 7])), min_size=1, max_size=2
        ),
    )
    def test_xpowers_multiples(self, d, raw):
        """Every x-exponent of T_2..T_{k+1} is a multiple of d_k."""
        pairs = tuple((d * m, q) for m, q in raw if (d * m) % q)
        if not pairs:
            return
        seq = build_sequence(ValuationSpec(pairs, (1,) * len(pairs)))
        assert seq.d[-1] % d == 0
        assert check_xpowers(seq, seq.level)


class TestChunkStep:
    """Tests for chunk_step."""

    def test_exponent_drops(self):
        """t = 2 and p = 5 give g = 1 and the exponent drops to 1."""
        nxt = chunk_step(state(2, [(5, 3)]))
        chunk = nxt.last_chunk
        assert nxt.t == 1
        assert (chunk.g, chunk.pbar, chunk.qbar) == (1, 5, 6)
        assert chunk.s_steps == euclid_data(5, 3).epsilon
        assert chunk.r_steps == euclid_data(5, 6).epsilon
        assert nxt.delta.is_unit

    def test_exponent_kept(self):
        """t = 2 divides p = 4, so the exponent stays 2."""
        nxt = chunk_step(state(2, [(4, 3)]))
        assert nxt.t == 2
        assert (nxt.last_chunk.pbar, nxt.last_chunk.qbar) == (2, 3)

    def test_t_one(self):
        """t = 1 still performs the chunk step."""
        nxt = chunk_step(state(1, [(5, 3)]))
        assert nxt.t == 1
        assert nxt.last_chunk.qbar == 3

    def test_tail_spec(self):
        """The next state carries the tail of the spec with mu / Q_1."""
        nxt = chunk_step(state(2, [(5, 3), (1, 2)]))
        assert nxt.spec.pairs == ((1, 2),)
        assert nxt.spec.mu == Fraction(1, 3)
        assert nxt.S_chart.values[0] == Fraction(1, 3)
        assert nxt.R_chart.values[0] == Fraction(1, 3)

    def test_delta_must_be_rescaled(self):
        """The chunk step expects delta with constant term 1."""
        with pytest.raises(DomainError):
            chunk_step(state(2, [(5, 3)], PowerSeries.constant(4)))

    @settings(max_examples=50, deadline=None)
    @given(
        st.integers(1, 12),
        st.tuples(st.integers(1, 11), st.integers(1, 4)).filter(lambda pq: gcd(*pq) == 1),
        st.sampled_from(DELTAS),
    )
    def test_chunk_gcd(self, t, pq, delta):
        """The chunk reaches U = X^g Delta with g = gcd(t, p) and Delta a unit."""
        p, _ = pq
        nxt = chunk_step(state(t, [pq], delta, precision=16))
        assert nxt.t == gcd(t, p)
        assert nxt.last_chunk.delta_residue != 0


class TestLadder:
    """Tests for verify_ladder."""

    def test_ladder_below_obstruction(self, spec_43_32):
        """Levels below the obstruction get one ladder check each."""
        checks = verify_ladder(extension_state(2, PowerSeries.one(), spec_43_32), 2)
        assert len(checks) == 1
        assert checks[0].i == 1
        assert checks[0].delta_residue == 1
        assert checks[0].s_steps == euclid_data(4, 3).epsilon
        assert checks[0].r_steps == euclid_data(2, 3).epsilon

    def test_no_ladder_at_first_level(self, spec_53):
        """An obstruction at level 1 has no ladder."""
        assert verify_ladder(extension_state(2, PowerSeries.one(), spec_53), 1) == ()


class TestDescend:
    """Tests for descend and the toroidal certificate."""

    def test_single_chunk(self, spec_53):
        """One chunk at level 1 takes t = 2 to 1."""
        report = descend(extension_state(2, PowerSeries.one(), spec_53, 12))
        chunks = [it for it in report.iterations if it.M is not None]
        assert [(it.M, it.t, it.g) for it in chunks] == [(1, 2, 1)]
        assert report.final_t == 1
        assert report.certificate.exponent == 1
        assert report.certificate.case is ValuationCase.NONDISCRETE

    def test_direct_transfer(self, spec_even):
        """An unobstructed t is transferred without a chunk."""
        report = descend(extension_state(2, PowerSeries.one(), spec_even, 12))
        assert len(report.iterations) == 1
        assert report.iterations[0].M is None
        assert report.final_t == 2
        assert report.verified_to_level == 2
        assert report.certificate.group_gcd_R == 2 * report.certificate.group_gcd_S
        assert report.certificate.caveat == "verified to level 2"

    def test_two_chunks(self, spec_43_32):
        """t = 6 descends through 2 to 1."""
        report = descend(extension_state(6, PowerSeries.one(), spec_43_32, 12))
        assert [it.t for it in report.iterations] == [6, 2, 1]
        assert [it.M for it in report.iterations] == [1, 1, None]
        assert report.final_t == 1

    def test_ladder_then_chunk(self, spec_43_32):
        """t = 2 climbs the ladder to level 2 before its chunk."""
        report = descend(extension_state(2, PowerSeries.one(), spec_43_32, 12))
        first = report.iterations[0]
        assert (first.t, first.M, first.g) == (2, 2, 1)
        assert len(first.ladder) == 1
        assert report.final_t == 1

    def test_discrete_case(self):
        """A spec ending in q_i = 1 is certified as discrete."""
        spec = ValuationSpec(((2, 1), (4, 1)), (1, 1))
        report = descend(extension_state(2, PowerSeries({(0, 0): 1, (1, 0): 1}), spec, 12))
        assert report.classification is Classification.DISCRETE
        assert report.certificate.case is ValuationCase.DISCRETE

    def test_step_bound(self, spec_43_32):
        """The step bound stops a long descent."""
        with pytest.raises(StepBoundExceeded):
            descend(extension_state(6, PowerSeries.one(), spec_43_32, 12), step_bound=1)

    def test_precision_too_low(self, spec_53):
        """Precision 3 is too low for the checked identities."""
        with pytest.raises(PrecisionExhausted):
            descend(extension_state(2, PowerSeries.one(), spec_53, 3))

    def test_irrational_unit(self, spec_53):
        """A constant unit without a rational root stops the descent."""
        with pytest.raises(UnitRootNotRational):
            descend(extension_state(2, PowerSeries.constant(2), spec_53, 12))

    def test_required_precision(self, spec_43_32):
        """Precision covers t and every p_i and q_i up to the level."""
        assert required_precision(6, spec_43_32) == 8
        assert required_precision(2, spec_43_32, 1) == 6


class TestGeneratedDescents:
    """Descent over generated scenarios."""

    @pytest.mark.parametrize("seed", range(50))
    def test_descent_certifies(self, seed):
        """t strictly decreases and the final value groups differ by the factor t."""
        payload = generate(seed, "descent").parsed()
        st0 = extension_state(
            payload.t,
            PowerSeries.from_poly(payload.delta.to_poly()),
            payload.spec.to_spec(),
            payload.precision,
        )
        report = descend(st0)
        ts = [it.t for it in report.iterations]
        assert ts[0] == payload.t
        assert all(a > b for a, b in zip(ts, ts[1:]))
        cert = report.certificate
        assert cert is not None
        assert cert.group_gcd_R == report.final_t * cert.group_gcd_S
