"""Embedding and functional-inequality constants: closed-form decimals,
the tail-constant identity, finite-section monotonicity, and the flux
bound, all at the standard parameters."""

from fractions import Fraction

import gmpy2
import pytest

from freudcaps.embed import (compactness_constants, flux_bound,
                             poincare_enclosure, tail_constants)
from tests.conftest import C_MINUS, C_PLUS


def frac(x) -> Fraction:
    return Fraction(gmpy2.mpq(x))


@pytest.fixture(scope="module")
def compact(enclosure, coeffs_2400):
    return compactness_constants(coeffs_2400, enclosure.N, C_PLUS)


class TestCompactness:
    def test_closed_form_decimals(self, compact):
        C_alpha, theta = compact
        # ten-digit published roundings of the closed-form values
        assert abs(float(C_alpha.mid()) - 1.299925254) < 5e-10
        assert abs(float(theta.mid()) - 0.350328462) < 5e-10
        assert C_alpha.width() < 1e-8 and theta.width() < 1e-8

    def test_theta_below_one(self, compact):
        _, theta = compact
        assert theta.hi < 1


class TestTailConstants:
    def test_identity_and_bound(self, compact, coeffs_2400):
        C_alpha, theta = compact
        C12, C22, C = tail_constants(coeffs_2400, 2187, C_alpha, theta,
                                     "even")
        # C is the quadrature sum sqrt(C12^2 + C22^2)
        s = (C12 * C12 + C22 * C22).sqrt()
        assert C.lo <= s.hi and s.lo <= C.hi
        assert float(C.hi) <= 1.2233

    def test_below_crossover_rejected(self, compact, coeffs_2400):
        C_alpha, theta = compact
        with pytest.raises(Exception):
            tail_constants(coeffs_2400, 1000, C_alpha, theta, "even")


class TestPoincare:
    def test_desk_scale_window(self, coeffs_2400):
        res = poincare_enclosure(coeffs_2400, 1200)
        lo = float(res.lower.lo)
        assert 33.0 <= lo <= 33.58004242 + 1e-6

    def test_finite_section_monotone(self, coeffs_2400):
        r1 = poincare_enclosure(coeffs_2400, 1200)
        r2 = poincare_enclosure(coeffs_2400, 2000)
        assert float(r1.lower.lo) <= float(r2.lower.hi) + 1e-12

    def test_desk_scale_has_no_tail_bound(self, coeffs_2400):
        # below the certified crossover only the finite-section lower
        # value is available
        res = poincare_enclosure(coeffs_2400, 1200)
        assert res.upper is None

    def test_lower_below_upper_past_crossover(self, coeffs_2400):
        res = poincare_enclosure(coeffs_2400, 2200)
        assert res.upper is not None
        assert res.lower.lo <= res.upper.hi


class TestFlux:
    def test_bound_value(self, compact, coeffs_2400):
        C_alpha, theta = compact
        flux = flux_bound(coeffs_2400, 2187, C_MINUS, C_PLUS, theta, C_alpha)
        assert float(flux.c.hi) <= 29.492 + 1e-2
        assert flux.c.lo > 0
        assert flux.Z.lo > 0

    def test_sup_norm_constants_appear_with_poincare(self, compact,
                                                     coeffs_2400):
        C_alpha, theta = compact
        C_P = poincare_enclosure(coeffs_2400, 2200).upper
        flux = flux_bound(coeffs_2400, 2187, C_MINUS, C_PLUS, theta,
                          C_alpha, C_P=C_P)
        assert flux.linf_const is not None and flux.h1R_const is not None
        assert flux.linf_const.lo > 0
        # the H1(R) embedding constant dominates the flux part alone
        assert float(flux.h1R_const.hi) >= float(flux.Z.sqrt().lo)
