"""End-to-end acceptance gate.

Eight criteria: threshold certification, compactness constants, the
Poincare enclosure, the flux bound, the quadrature self-test, the desk-scale
fixed-point proof on both solution branches, the structural operator
identity suite, and oracle equivalence of the certified recurrence values.

The expensive prerequisites (threshold certification, the two high-order
Gauss rules, the node-evaluation matrices) are disk-cached; a cold cache
makes this module run for a few hours, a warm one for minutes plus the
proof bounds themselves.
"""

from fractions import Fraction

import gmpy2
import mpmath
import numpy as np
import pytest

from freudcaps import gpcap
from freudcaps.embed import (compactness_constants, flux_bound,
                             poincare_enclosure, tail_constants)
from freudcaps.freud import CoeffVec, build_D, coeffs_from_enclosure, q_to_p
from freudcaps.ivlmath import PrecisionContext
from freudcaps.painleve import (PainleveParams, initial_datum,
                                verify_asymptotic_threshold)
from freudcaps.quad import (freud_gauss_rule, integrate_product,
                            orthonormality_defect)
from tests.conftest import C_MINUS, C_PLUS, KAPPA, N1

GP_N = 2200
GP_NU = 148


def frac(x) -> Fraction:
    return Fraction(gmpy2.mpq(x))


def encloses_rounding(iv, value: float, rho: float) -> bool:
    """True iff the decimal rounding `value` lies within rho of the
    enclosure and the enclosure radius is at most rho."""
    v = Fraction(str(value))
    r = Fraction(str(rho))
    lo, hi = frac(iv.lo), frac(iv.hi)
    return lo - r <= v <= hi + r and hi - lo <= 2 * r


# -- criterion 1: thresholds ------------------------------------------------


class TestCriterion1Thresholds:
    def test_painleve_thresholds(self, std_params, enclosure):
        assert verify_asymptotic_threshold(std_params, N1)
        assert enclosure.N1 == N1
        assert enclosure.N2 == 9215
        assert enclosure.N == 2187


# -- criterion 2: compactness constants ------------------------------------


class TestCriterion2Compactness:
    def test_closed_form_constants(self, enclosure, coeffs_2400):
        C_alpha, theta = compactness_constants(coeffs_2400, enclosure.N,
                                               C_PLUS)
        assert encloses_rounding(C_alpha, 1.299925254, 1e-8)
        assert encloses_rounding(theta, 0.350328462, 1e-8)

    def test_tail_constant_at_crossover(self, enclosure, coeffs_2400):
        C_alpha, theta = compactness_constants(coeffs_2400, enclosure.N,
                                               C_PLUS)
        _, _, C = tail_constants(coeffs_2400, 2187, C_alpha, theta, "even")
        hi = float(C.hi)
        assert hi <= 1.2233
        assert 1.2233 - hi <= 5e-4


# -- criterion 3: Poincare constant ----------------------------------------


class TestCriterion3Poincare:
    def test_large_section_enclosure(self, enclosure, ctx512):
        coeffs = coeffs_from_enclosure(enclosure, 3508, ctx512)
        res = poincare_enclosure(coeffs, 3500)
        lo, hi = frac(res.lower.lo), frac(res.upper.hi)
        v = Fraction("33.58004242")
        assert lo <= v <= hi
        assert hi - lo <= Fraction(5, 10 ** 7) * 2

    def test_desk_scale_window_and_monotonicity(self, coeffs_2400):
        r1 = poincare_enclosure(coeffs_2400, 1200)
        lo = float(r1.lower.lo)
        assert 33.0 <= lo <= 33.58004242 + 1e-6
        r2 = poincare_enclosure(coeffs_2400, 2000)
        assert float(r1.lower.lo) <= float(r2.lower.hi)


# -- criterion 4: flux bound ------------------------------------------------


class TestCriterion4Flux:
    def test_flux_constant(self, enclosure, coeffs_2400):
        C_alpha, theta = compactness_constants(coeffs_2400, enclosure.N,
                                               C_PLUS)
        flux = flux_bound(coeffs_2400, 2187, C_MINUS, C_PLUS, theta, C_alpha)
        assert float(flux.c.hi) <= 29.492 + 1e-2


# -- criterion 5: quadrature self-test -------------------------------------


class TestCriterion5Quadrature:
    @pytest.mark.parametrize("m", [4, 6])
    def test_selftest(self, m):
        rule = freud_gauss_rule(m, KAPPA, 40, PrecisionContext(256))
        assert float(orthonormality_defect(rule, 30)) <= 1e-20
        prev_hi = gmpy2.mpfr(0)
        for x, w in zip(rule.nodes, rule.weights):
            assert w.lo > 0
            assert x.lo > prev_hi
            prev_hi = x.hi


# -- criterion 6: desk-scale fixed-point proof ------------------------------


@pytest.fixture(scope="module")
def gp_setup():
    params = gpcap.GPParams.standard(4, 8)
    consts = gpcap.proof_constants(params, GP_N, GP_NU)
    return params, consts


def _prove_branch(params, consts, kind):
    sol = gpcap.newton_solve(params, GP_N,
                             gpcap.seed_vector(params, GP_N, kind))
    sol, n_u = gpcap.truncate_solution(sol)
    assert n_u <= GP_NU
    An = gpcap.build_An(sol, consts)
    Y = gpcap.bound_Y(sol, An, consts)
    _, _, _, _, Z1 = gpcap.bound_Z1(sol, An, consts)
    Z2, Z3 = gpcap.bound_Z2_Z3(sol, gpcap.An_norm_bound(An, consts.ctx),
                               consts)
    rr = gpcap.radii(Y, Z1, Z2, Z3)
    return sol, Z1, rr


class TestCriterion6FixedPointProof:
    def test_both_branches_certify(self, gp_setup):
        params, consts = gp_setup
        for kind in ("bump", "signed"):
            sol, Z1, rr = _prove_branch(params, consts, kind)
            assert float(Z1.hi) < 1, kind
            assert rr.success, kind
            assert float(rr.delta_lo.hi) <= 1e-6, kind

    def test_positivity_separates_branches(self, gp_setup):
        params, consts = gp_setup
        verdicts = {}
        for kind in ("bump", "signed"):
            sol, _, rr = _prove_branch(params, consts, kind)
            verdicts[kind] = gpcap.positivity_check(
                sol, rr.delta_lo, consts.flux, params, coeffs=consts.coeffs)
        assert verdicts["bump"] is True
        assert verdicts["signed"] is False

    def test_h1R_error_finite_and_linear(self, gp_setup):
        params, consts = gp_setup
        _, _, rr = _prove_branch(params, consts, "bump")
        h1 = gpcap.h1R_error(rr.delta_lo, consts.flux)
        assert np.isfinite(float(h1.hi)) and float(h1.hi) > 0
        two = rr.delta_lo.ctx.ivl(2)
        h2 = gpcap.h1R_error(two * rr.delta_lo, consts.flux)
        ratio = float(h2.hi) / float(h1.hi)
        assert abs(ratio - 2.0) < 1e-9


# -- criterion 7: structural invariant suite -------------------------------


class TestCriterion7Structure:
    def test_jacobi_consistency_window(self, coeffs_300):
        from tests.test_freud import jacobi_dense
        dim = 58
        ctx = coeffs_300.ctx()
        J = jacobi_dense(coeffs_300, dim)
        J3 = (J @ J) @ J
        kap = ctx.ivl(KAPPA)
        D = build_D(coeffs_300, dim).to_dense()
        for i in range(50):
            for j in range(50):
                diff = (J3[i, j] - kap * J[i, j]) - (D[i, j] + D[j, i])
                assert diff.lo <= 0 <= diff.hi

    def test_DTD_pentadiagonal_window(self, coeffs_300):
        D = build_D(coeffs_300, 58).to_dense()
        DTD = D.transpose() @ D
        for i in range(50):
            for j in range(50):
                if abs(i - j) not in (0, 2):
                    x = DTD[i, j]
                    assert x.lo <= 0 <= x.hi

    def test_sobolev_derivative_by_quadrature(self, coeffs_300):
        """Quadrature defect of q_n' - p_{n-1} for n <= 10."""
        ctx256 = PrecisionContext(256)
        rule = freud_gauss_rule(2, KAPPA, 30, ctx256)
        ctx = coeffs_300.ctx()
        dim = 16
        D = build_D(coeffs_300, dim).to_dense()
        for n in range(1, 11):
            e_n = [ctx.one() if k == n else ctx.zero() for k in range(dim)]
            qn = q_to_p(coeffs_300, CoeffVec("Q", "mixed", e_n))
            dq = D.matvec(qn.entries)
            c = [dq[k] - (ctx.one() if k == n - 1 else ctx.zero())
                 for k in range(dim)]
            cv = CoeffVec("P", "mixed", [x.round_to(ctx256) for x in c])
            defect = integrate_product(rule, [cv, cv], 2, coeffs_300)
            assert float(defect.hi) <= 1e-20, n

    def test_fixed_point_residual_all_indices(self, enclosure):
        ctx = enclosure.ctx()
        kap = enclosure.params.kappa_ivl(ctx)
        b = enclosure.b
        for n in range(1, enclosure.N2):
            res = ctx.ivl(n) / b[n] - (b[n - 1] + b[n] + b[n + 1] - kap)
            assert res.lo <= 0 <= res.hi, n


# -- criterion 8: oracle equivalence ---------------------------------------


class TestCriterion8Oracles:
    def test_forward_high_precision_inside_enclosures(self, enclosure):
        """A plain point recursion at 4x the certified working precision
        must land inside every certified enclosure up to N2."""
        # seed accuracy must beat the stored widths by the ~1.84 bits/step
        # error growth of the point recursion, so reuse the full-precision
        # initial datum rather than the 512-bit rounded b[1]
        bits = 2 * enclosure.bits
        ctx = gmpy2.context(precision=bits)
        b1 = initial_datum(KAPPA, enclosure.bits)
        with gmpy2.context(ctx):
            mid = (gmpy2.mpfr(b1.lo, bits) + gmpy2.mpfr(b1.hi, bits)) / 2
            kap = gmpy2.mpfr(int(KAPPA))
            prev, cur = gmpy2.mpfr(0), mid
            for n in range(1, enclosure.N2 + 1):
                iv = enclosure.b[n]
                assert iv.lo <= cur <= iv.hi, n
                nxt = gmpy2.mpfr(n) / cur - prev - cur + kap
                prev, cur = cur, nxt

    def test_b1_against_adaptive_quadrature(self):
        b1 = initial_datum(KAPPA, 512)
        lo, hi = frac(b1.lo), frac(b1.hi)
        assert (hi - lo) / lo <= Fraction(1, 10 ** 25)
        with mpmath.workdps(60):
            kap = float(KAPPA)
            V = lambda x: x ** 4 / 4 - kap * x ** 2 / 2
            pts = [0, 1, 2, mpmath.inf]
            Z = mpmath.quad(lambda x: mpmath.e ** (-V(x)), pts)
            M2 = mpmath.quad(lambda x: x ** 2 * mpmath.e ** (-V(x)), pts)
            ref = Fraction(mpmath.nstr(M2 / Z, 45))
        # oracle intersects the enclosure at its own accuracy
        tol = lo / 10 ** 40
        assert lo - tol <= ref <= hi + tol
