"""Recurrence-coefficient table and the banded operator representations:
independent quadrature oracles for orthonormality, the structural operator
identities on finite windows, and basis-change consistency."""

from fractions import Fraction

import gmpy2
import mpmath
import pytest

from freudcaps.freud import (CoeffVec, build_D, build_P, eval_pn, q_to_p,
                             read_coeff_file, write_coeff_file)
from freudcaps.ivlmath import DenseIvlMatrix, PrecisionContext
from tests.conftest import KAPPA

WINDOW = 50
MARGIN = 8      # extra modes so truncation cannot pollute the window


def frac(x) -> Fraction:
    return Fraction(gmpy2.mpq(x))


def jacobi_dense(coeffs, dim) -> DenseIvlMatrix:
    """Multiplication-by-x matrix: symmetric tridiagonal with a_n."""
    ctx = coeffs.ctx()
    z = ctx.zero()
    data = [[z for _ in range(dim)] for _ in range(dim)]
    for i in range(dim - 1):
        a = coeffs.a[i + 1]
        data[i][i + 1] = a
        data[i + 1][i] = a
    return DenseIvlMatrix(data, ctx)


class TestOrthonormality:
    def test_small_degrees_against_adaptive_quadrature(self, coeffs_300):
        """<p_i, p_j> = delta_ij by mpmath adaptive quadrature, using the
        certified coefficient midpoints."""
        kap = float(KAPPA)

        def hp(x):
            q = Fraction(gmpy2.mpq(x))
            return mpmath.mpf(q.numerator) / q.denominator

        def p_val(n, x):
            prev, cur = mpmath.mpf(0), mpmath.mpf(1)
            for k in range(n):
                ak = mids[k] if k else 0
                cur, prev = (x * cur - ak * prev) / mids[k + 1], cur
            return cur

        with mpmath.workdps(40):
            mids = [hp(coeffs_300.a[n].mid()) for n in range(8)]
            V = lambda x: x ** 4 / 4 - kap * x ** 2 / 2
            # split at the weight's maxima so the adaptive rule resolves
            # the two sharp bumps
            pts = [-mpmath.inf, -2, 0, 2, mpmath.inf]
            Z = mpmath.quad(lambda x: mpmath.e ** (-V(x)), pts)
            for i in range(5):
                for j in range(i, 5):
                    got = mpmath.quad(
                        lambda x: p_val(i, x) * p_val(j, x)
                        * mpmath.e ** (-V(x)), pts) / Z
                    assert abs(got - (1 if i == j else 0)) < 1e-20


class TestOperatorWindows:
    def test_jacobi_consistency(self, coeffs_300):
        """Multiplication by the potential derivative equals D + D^T on a
        50x50 window (entrywise containment of zero in the difference)."""
        dim = WINDOW + MARGIN
        ctx = coeffs_300.ctx()
        J = jacobi_dense(coeffs_300, dim)
        J3 = (J @ J) @ J
        kap = ctx.ivl(KAPPA)
        D = build_D(coeffs_300, dim).to_dense()
        for i in range(WINDOW):
            for j in range(WINDOW):
                lhs = J3[i, j] - kap * J[i, j]
                rhs = D[i, j] + D[j, i]
                diff = lhs - rhs
                assert diff.lo <= 0 <= diff.hi, f"mismatch at ({i},{j})"

    def test_DTD_pentadiagonal_identity(self, coeffs_300):
        """D^T D is pentadiagonal with zero odd offsets, and matches the
        independent assembly (J^3 - kappa J) D - D^2 on a 50x50 window."""
        dim = WINDOW + MARGIN
        ctx = coeffs_300.ctx()
        J = jacobi_dense(coeffs_300, dim)
        D = build_D(coeffs_300, dim).to_dense()
        DTD = D.transpose() @ D
        kap = ctx.ivl(KAPPA)
        J3 = (J @ J) @ J
        kJ = DenseIvlMatrix([[kap * J[i, j] for j in range(dim)]
                             for i in range(dim)], ctx)
        L = (J3 - kJ) @ D - (D @ D)
        for i in range(WINDOW):
            for j in range(WINDOW):
                diff = DTD[i, j] - L[i, j]
                assert diff.lo <= 0 <= diff.hi, f"mismatch at ({i},{j})"
                if abs(i - j) not in (0, 2):
                    x = DTD[i, j]
                    assert x.lo <= 0 <= x.hi, f"band violation at ({i},{j})"

    def test_derivative_of_sobolev_modes(self, coeffs_300):
        """Differentiating the n-th Sobolev mode gives the (n-1)-th
        weighted-L2 mode: D P^{-1} e_n = e_{n-1} (the banded D factors as
        shift times P)."""
        dim = 20
        ctx = coeffs_300.ctx()
        D = build_D(coeffs_300, dim).to_dense()
        for n in range(1, 11):
            e_n = [ctx.one() if k == n else ctx.zero() for k in range(dim)]
            qn = q_to_p(coeffs_300, CoeffVec("Q", "mixed", e_n))
            dq = D.matvec(qn.entries)
            for i in range(dim - 4):
                target = 1 if i == n - 1 else 0
                assert dq[i].lo <= target <= dq[i].hi, (n, i)


class TestBasisChange:
    def test_q_to_p_solves_P(self, coeffs_300):
        ctx = coeffs_300.ctx()
        v = CoeffVec("Q", "even", [ctx.ivl(Fraction(k % 3, 7))
                                   if k % 2 == 0 else ctx.zero()
                                   for k in range(12)])
        x = q_to_p(coeffs_300, v)
        assert x.basis == "P" and x.dim == 12
        P = build_P(coeffs_300, 12)
        back = P.matvec(x.entries)
        for k in range(12):
            diff = back[k] - v.entries[k]
            assert diff.lo <= 0 <= diff.hi

    def test_parity_validation(self):
        ctx = PrecisionContext(64)
        with pytest.raises(ValueError):
            CoeffVec("Q", "even", [ctx.zero(), ctx.one()])
        with pytest.raises(ValueError):
            CoeffVec("X", "even", [ctx.one()])


class TestEvalPn:
    def test_matches_vector_recurrence(self, coeffs_300):
        ctx = coeffs_300.ctx()
        x = ctx.ivl(Fraction(7, 8))
        # p_1(x) = x / a_1 directly from the recurrence seed
        p1 = eval_pn(coeffs_300, 1, x)
        ref = x / coeffs_300.a[1]
        diff = p1 - ref
        assert diff.lo <= 0 <= diff.hi

    def test_range_check(self, coeffs_300):
        ctx = coeffs_300.ctx()
        with pytest.raises(ValueError):
            eval_pn(coeffs_300, coeffs_300.length + 5, ctx.one())


class TestCoeffFile:
    def test_roundtrip_conservative(self, coeffs_300, tmp_path):
        path = tmp_path / "coeffs.txt"
        entries = coeffs_300.a[:40]
        write_coeff_file(path, entries, digits=30)
        got = read_coeff_file(path, coeffs_300.ctx())
        assert len(got) == 40
        for a, b in zip(entries, got):
            assert b.lo <= a.lo and a.hi <= b.hi

    def test_non_contiguous_rejected(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("0 1.0 1.0\n2 2.0 2.0\n")
        with pytest.raises(ValueError):
            read_coeff_file(path, PrecisionContext(64))
