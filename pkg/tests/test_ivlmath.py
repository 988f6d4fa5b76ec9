"""Interval arithmetic: containment soundness against float oracles,
directed rounding, and decimal serialization."""

import math
from fractions import Fraction

import gmpy2
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from freudcaps.ivlmath import (Ivl, PrecisionContext, decimal_directed,
                               ivl_from_decimal, ivl_to_decimal,
                               l2_norm_upper_2x2, vec_norm2_upper)

CTX = PrecisionContext(128)
CTX53 = PrecisionContext(53)

finite = st.floats(allow_nan=False, allow_infinity=False,
                   min_value=-1e12, max_value=1e12)
fractions = st.fractions(min_value=-10**6, max_value=10**6,
                         max_denominator=10**9)


def contains(iv: Ivl, q: Fraction) -> bool:
    return Fraction(gmpy2.mpq(iv.lo)) <= q <= Fraction(gmpy2.mpq(iv.hi))


class TestConstruction:
    def test_rational_containment(self):
        x = CTX.ivl(Fraction(1, 3))
        assert contains(x, Fraction(1, 3))
        assert x.lo < x.hi          # 1/3 is not binary-representable

    def test_exact_dyadic_is_point(self):
        x = CTX.ivl(Fraction(3, 8))
        assert x.lo == x.hi

    @given(fractions)
    def test_any_rational_contained(self, q):
        assert contains(CTX.ivl(q), q)


class TestArithmeticContainment:
    """Interval results must contain the exact rational results."""

    @given(fractions, fractions)
    def test_add_mul_sub(self, a, b):
        xa, xb = CTX.ivl(a), CTX.ivl(b)
        assert contains(xa + xb, a + b)
        assert contains(xa - xb, a - b)
        assert contains(xa * xb, a * b)

    @given(fractions, fractions.filter(lambda q: abs(q) > Fraction(1, 1000)))
    def test_div(self, a, b):
        assert contains(CTX.ivl(a) / CTX.ivl(b), a / b)

    @given(fractions)
    def test_square_nonnegative(self, a):
        sq = CTX.ivl(a) * CTX.ivl(a)
        assert contains(sq, a * a)

    @given(st.fractions(min_value=0, max_value=10**6, max_denominator=10**6))
    def test_sqrt_inverse(self, a):
        r = CTX.ivl(a).sqrt()
        assert contains(r * r, a)

    @given(fractions, st.integers(min_value=0, max_value=6))
    def test_ipow(self, a, k):
        assert contains(CTX.ivl(a).ipow(k), a ** k)

    @given(fractions)
    def test_neg_keeps_precision(self, a):
        x = CTX.ivl(a)
        y = -x
        assert contains(y, -a)
        assert y.lo.precision >= 128 and y.hi.precision >= 128


class TestTranscendental:
    @given(st.floats(min_value=-30.0, max_value=30.0))
    def test_exp(self, t):
        q = Fraction(t)
        iv = CTX.ivl(q).exp()
        lo, hi = float(iv.lo), float(iv.hi)
        assert lo <= math.exp(t) * (1 + 1e-13)
        assert hi >= math.exp(t) * (1 - 1e-13)

    @given(st.floats(min_value=1e-6, max_value=1e6))
    def test_log_exp_roundtrip(self, t):
        iv = CTX.ivl(Fraction(t)).log().exp()
        assert contains(iv, Fraction(t))


class TestDirectedRounding:
    def test_low_precision_widens_outward(self):
        q = Fraction(1, 3)
        x53 = CTX53.ivl(q)
        x128 = CTX.ivl(q)
        assert x53.lo <= x128.lo and x128.hi <= x53.hi

    @given(fractions)
    def test_round_to_contains(self, q):
        x = CTX.ivl(q)
        y = x.round_to(CTX53)
        assert y.lo <= x.lo and x.hi <= y.hi


class TestDecimal:
    @given(fractions)
    def test_decimal_directed_brackets(self, q):
        x = CTX.mpfr_down(q)
        lo = decimal_directed(x, 20, "down")
        hi = decimal_directed(x, 20, "up")
        assert Fraction(lo) <= Fraction(gmpy2.mpq(x)) <= Fraction(hi)

    @given(fractions)
    def test_serialization_conservative(self, q):
        x = CTX.ivl(q)
        lo, hi = ivl_to_decimal(x, 30)
        y = ivl_from_decimal(lo, hi, CTX)
        assert y.lo <= x.lo and x.hi <= y.hi

    def test_reserialization_never_tightens(self):
        x = CTX.ivl(Fraction(22, 7))
        lo, hi = ivl_to_decimal(x, 30)
        lo2, hi2 = ivl_to_decimal(ivl_from_decimal(lo, hi, CTX), 30)
        assert Fraction(lo2) <= Fraction(lo)
        assert Fraction(hi2) >= Fraction(hi)


class TestNormBounds:
    @given(finite, finite, finite, finite)
    @settings(max_examples=60)
    def test_2x2_spectral_norm_upper(self, a, b, c, d):
        import numpy as np
        iv = [CTX.ivl(Fraction(v)) for v in (a, b, c, d)]
        got = l2_norm_upper_2x2(*iv)
        ref = np.linalg.norm(np.array([[a, b], [c, d]]), 2)
        assert float(got.hi) >= ref * (1 - 1e-12)

    @given(st.lists(fractions, min_size=1, max_size=20))
    def test_vec_norm2_upper(self, vals):
        import numpy as np
        vecs = [CTX.ivl(q) for q in vals]
        got = vec_norm2_upper(vecs)
        ref = math.sqrt(float(sum(Fraction(q) ** 2 for q in vals)))
        assert float(got.hi) >= ref * (1 - 1e-12)


class TestInvariants:
    @given(fractions, fractions)
    def test_lo_le_hi_preserved(self, a, b):
        x = CTX.ivl(min(a, b)).hull(CTX.ivl(max(a, b)))
        for y in (x + x, x * x, x - x, -x):
            assert y.lo <= y.hi

    def test_zero_one_pi(self):
        assert CTX.zero().lo == 0 == CTX.zero().hi
        assert CTX.one().lo == 1 == CTX.one().hi
        pi = CTX.pi()
        q = Fraction("3.1415926535897932384626433832795028841971693993751")
        assert contains(pi, q)
