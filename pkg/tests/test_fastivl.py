"""Midpoint-radius float64 matrix arithmetic: every operation must produce
outward enclosures of the exact real results.  Oracles use extended
precision (mpmath) or exact dyadic rationals on random inputs."""

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from freudcaps.fastivl import (MR, certified_inverse_fast, gershgorin_discs,
                               norm_1_upper, norm_2_upper, norm_inf_upper,
                               rayleigh_lower)

RNG = np.random.default_rng(20260823)


def rand_mr(shape, scale=1.0, rad_scale=1e-12):
    mid = RNG.standard_normal(shape) * scale
    rad = np.abs(RNG.standard_normal(shape)) * rad_scale
    return MR(mid, rad)


def exact_frac(A: MR):
    """Exact rational endpoints mid +- rad (both dyadic floats)."""
    mid = np.vectorize(Fraction)(A.mid)
    rad = np.vectorize(Fraction)(A.rad)
    return mid - rad, mid + rad


class TestElementwise:
    def test_add_mul_containment(self):
        A, B = rand_mr((8, 8)), rand_mr((8, 8))
        alo, ahi = exact_frac(A)
        blo, bhi = exact_frac(B)
        S = A + B
        slo, shi = exact_frac(S)
        assert np.all(slo <= alo + blo) and np.all(ahi + bhi <= shi)
        P = A * B
        plo, phi = exact_frac(P)
        cands = [alo * blo, alo * bhi, ahi * blo, ahi * bhi]
        pmin = np.minimum.reduce(cands)
        pmax = np.maximum.reduce(cands)
        assert np.all(plo <= pmin) and np.all(pmax <= phi)

    def test_square_contains_and_nonnegative(self):
        A = rand_mr((30,), rad_scale=1e-3)
        S = A.square()
        lo, hi = exact_frac(A)
        mid2 = np.vectorize(Fraction)(A.mid) ** 2
        slo, shi = exact_frac(S)
        assert np.all(slo <= mid2) and np.all(mid2 <= shi)

    def test_sqrt_inverse(self):
        A = MR(np.abs(RNG.standard_normal(20)) + 0.1, np.full(20, 1e-10))
        R = A.sqrt()
        sq = R.square()
        assert np.all(sq.lo() <= A.mid) and np.all(A.mid <= sq.hi())

    def test_abs_bounds(self):
        A = rand_mr((25,), rad_scale=0.5)
        B = abs(A)
        assert np.all(B.lo() >= -1e-13)
        assert np.all(B.hi() >= np.abs(A.mid))


class TestMatmul:
    def test_matmul_contains_high_precision_product(self):
        import mpmath
        mpmath.mp.dps = 60
        A, B = rand_mr((12, 9)), rand_mr((9, 7))
        C = A @ B
        ref = mpmath.matrix(A.mid.tolist()) * mpmath.matrix(B.mid.tolist())
        # the exact mid product must lie strictly inside the enclosure
        for i in range(12):
            for j in range(7):
                assert mpmath.mpf(float(C.lo()[i, j])) <= ref[i, j] \
                    <= mpmath.mpf(float(C.hi()[i, j]))

    def test_dot_and_norm2sq(self):
        v = rand_mr((40,))
        d = v.dot(v)
        n2 = v.norm2sq()
        exact = float(sum(Fraction(x) ** 2 for x in v.mid))
        assert d.lo()[()] <= exact <= d.hi()[()]
        assert n2.lo()[()] <= exact <= n2.hi()[()]

    def test_norm2_upper_dominates(self):
        v = rand_mr((15,))
        assert v.norm2_upper() >= np.linalg.norm(v.mid)


class TestNorms:
    def test_operator_norm_uppers(self):
        A = rand_mr((10, 10), rad_scale=1e-8)
        assert norm_1_upper(A) >= np.linalg.norm(A.mid, 1)
        assert norm_inf_upper(A) >= np.linalg.norm(A.mid, np.inf)
        assert norm_2_upper(A) >= np.linalg.norm(A.mid, 2)

    def test_gershgorin_contains_eigenvalues(self):
        M = rand_mr((9, 9), rad_scale=1e-9)
        sym = MR((M.mid + M.mid.T) / 2, M.rad)
        centers, radii = gershgorin_discs(sym)
        eigs = np.linalg.eigvalsh(sym.mid)
        lo, hi = np.min(centers - radii), np.max(centers + radii)
        assert lo <= eigs.min() + 1e-12 and eigs.max() - 1e-12 <= hi

    def test_rayleigh_lower(self):
        M0 = RNG.standard_normal((8, 8))
        spd = M0 @ M0.T + 8 * np.eye(8)
        M = MR(spd, np.full((8, 8), 1e-12))
        w, V = np.linalg.eigh(spd)
        got = rayleigh_lower(M, V[:, 0])
        assert got <= w[0] + 1e-8


class TestInverse:
    def test_certified_inverse_contains_identity(self):
        A0 = RNG.standard_normal((12, 12)) + 6 * np.eye(12)
        A = MR(A0, np.full((12, 12), 1e-13))
        Ainv = certified_inverse_fast(A)
        I = A @ Ainv
        for i in range(12):
            for j in range(12):
                target = 1.0 if i == j else 0.0
                assert I.lo()[i, j] <= target <= I.hi()[i, j]

    def test_singular_matrix_rejected(self):
        A = MR(np.ones((4, 4)), np.zeros((4, 4)))
        with pytest.raises(Exception):
            certified_inverse_fast(A)


class TestInvariants:
    @given(st.integers(1, 6), st.integers(1, 6))
    @settings(max_examples=20, deadline=None)
    def test_rad_nonnegative_closed(self, r, c):
        A, B = rand_mr((r, c)), rand_mr((r, c))
        for X in (A + B, A - B, A * B, A.square(), abs(A)):
            assert np.all(X.rad >= 0)

    def test_from_lohi_roundtrip(self):
        lo = np.array([-1.0, 0.25, 3.0])
        hi = np.array([-0.5, 0.75, 3.0])
        A = MR.from_lohi(lo, hi)
        assert np.all(A.lo() <= lo) and np.all(hi <= A.hi())
