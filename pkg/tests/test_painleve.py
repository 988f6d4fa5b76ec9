"""Certification of the positive recurrence sequence b_n: independent
oracles for the initial datum, containment of the fixed-point identity,
threshold search behavior, and the inflation/sandwich machinery."""

from fractions import Fraction

import gmpy2
import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from freudcaps.ivlmath import PrecisionContext
from freudcaps.painleve import (PainleveParams, epsilon_inflate, find_N2,
                                forward_enclosure, forward_iterates,
                                initial_datum, s_map, verify_sandwich,
                                verify_asymptotic_threshold)
from tests.conftest import C_MINUS, C_PLUS, KAPPA


def frac(x) -> Fraction:
    return Fraction(gmpy2.mpq(x))


def oracle_b1(kappa: float, dps: int = 50) -> mpmath.mpf:
    """Adaptive-quadrature oracle for b_1 = E[x^2] under e^{-V}/Z."""
    with mpmath.workdps(dps):
        V = lambda x: x ** 4 / 4 - kappa * x ** 2 / 2
        Z = mpmath.quad(lambda x: mpmath.e ** (-V(x)), [0, mpmath.inf])
        M2 = mpmath.quad(lambda x: x ** 2 * mpmath.e ** (-V(x)),
                         [0, mpmath.inf])
        return M2 / Z


class TestInitialDatum:
    @pytest.mark.parametrize("kappa", [2, 4, 5])
    def test_against_adaptive_quadrature(self, kappa):
        b1 = initial_datum(Fraction(kappa), 256)
        with mpmath.workdps(50):
            ref = Fraction(mpmath.nstr(oracle_b1(float(kappa)), 40))
        tol = Fraction(1, 10 ** 30)
        assert frac(b1.lo) - tol <= ref <= frac(b1.hi) + tol
        assert b1.width() < 1e-40

    def test_tightens_with_bits(self):
        w128 = initial_datum(KAPPA, 128).width()
        w512 = initial_datum(KAPPA, 512).width()
        assert w512 < w128


class TestForwardRecursion:
    def test_fixed_point_residual_contains_zero(self):
        params = PainleveParams(KAPPA, C_MINUS, C_PLUS, 2)
        b, _ = forward_enclosure(params, 200)
        ctx = b[1].ctx
        kap = params.kappa_ivl(ctx)
        for n in range(1, 199):
            res = ctx.ivl(n) / b[n] - (b[n - 1] + b[n] + b[n + 1] - kap)
            assert res.lo <= 0 <= res.hi, f"residual misses zero at n={n}"

    def test_positivity_enforced(self):
        ctx = PrecisionContext(64)
        # a bad initial datum drives an iterate negative quickly
        with pytest.raises(ArithmeticError):
            forward_iterates(ctx.ivl(Fraction(1, 100)),
                             ctx.ivl(Fraction(0)), 20)

    def test_envelope_tracking(self):
        # b_n must track the sqrt(n/3) envelope between c- and c+ past the
        # crossover region
        params = PainleveParams(KAPPA, C_MINUS, C_PLUS, 2)
        b, _ = forward_enclosure(params, 4000)
        ctx = b[1].ctx
        for n in (3000, 3500, 3999):
            env_m = ctx.ivl(C_MINUS) * ctx.ivl(Fraction(n, 3)).sqrt()
            env_p = ctx.ivl(C_PLUS) * ctx.ivl(Fraction(n, 3)).sqrt()
            assert env_m.lo < b[n].lo and b[n].hi < env_p.hi


class TestSMap:
    @given(st.fractions(min_value=Fraction(1, 10), max_value=100,
                        max_denominator=1000),
           st.fractions(min_value=Fraction(1, 10), max_value=100,
                        max_denominator=1000),
           st.integers(1, 10000))
    @settings(max_examples=40, deadline=None)
    def test_oracle_containment(self, bp, bn, n):
        ctx = PrecisionContext(128)
        got = s_map(ctx.ivl(bp), ctx.ivl(bn), n, ctx.ivl(KAPPA))
        with mpmath.workdps(45):
            x = (mpmath.mpf(bp.numerator) / bp.denominator
                 + mpmath.mpf(bn.numerator) / bn.denominator
                 - 4) / (2 * mpmath.sqrt(n))
            ref = Fraction(mpmath.nstr(
                mpmath.sqrt(n) / (x + mpmath.sqrt(1 + x * x)), 35))
        tol = abs(ref) / 10 ** 25
        assert frac(got.lo) - tol <= ref <= frac(got.hi) + tol

    def test_positive_output(self):
        ctx = PrecisionContext(128)
        got = s_map(ctx.ivl(50), ctx.ivl(50), 7, ctx.ivl(KAPPA))
        assert got.lo > 0


class TestThresholds:
    def test_asymptotic_threshold_accepts_standard(self):
        params = PainleveParams(KAPPA, C_MINUS, C_PLUS, 2)
        assert verify_asymptotic_threshold(params, 9_000_000)

    def test_asymptotic_threshold_rejects_small(self):
        params = PainleveParams(KAPPA, C_MINUS, C_PLUS, 2)
        assert not verify_asymptotic_threshold(params, 10)

    def test_find_N2_matches_scan(self):
        params = PainleveParams(KAPPA, C_MINUS, C_PLUS, 2)
        assert find_N2(params, 9_000_000) == 9215


class TestSandwich:
    def test_inflated_pair_verifies(self, std_params):
        b, _ = forward_enclosure(std_params, 9217)
        bm, bp = epsilon_inflate(std_params, 9215, b, check_bits=512)
        assert verify_sandwich(std_params, bm, bp, 9215)

    def test_certified_enclosure_brackets(self, enclosure):
        # tight forward values stay inside the inflated envelope bounds
        assert enclosure.N2 == 9215
        ctx = enclosure.ctx()
        for n in (1, 100, 5000, 9215):
            assert enclosure.b[n].lo > 0
        # beyond N2 the envelope takes over and is ordered
        lo = enclosure.b_lower(20000)
        hi = enclosure.b_upper(20000)
        assert lo.hi < hi.lo
