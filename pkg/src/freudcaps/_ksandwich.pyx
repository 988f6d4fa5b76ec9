# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled directed-rounding scan of the envelope sandwich inequalities.

For each n in [n_lo, n_hi] the three sufficient checks below are evaluated in
double precision with hardware rounding-mode control (fesetround), so a
reported pass is rigorous; reported failures are re-examined at extended
precision by the caller.

With envelopes b(+/-)_n = c(+/-) sqrt(n/3) and the update
S(b)_n = sqrt(n) * f((b_{n-1} + b_{n+1} - kappa) / (2 sqrt(n))),
f(x) = 1/(x + sqrt(1 + x^2)), the checks are
  (1) lower(S(b+)_n) >= upper(b-_n)
  (2) upper(S(b-)_n) <= lower(b+_n)
  (3) lower(x+_n) >= upper(x-_n)   (f decreasing => S(b+)_n <= S(b-)_n)
"""

from libc.math cimport sqrt

cdef extern from "<fenv.h>" nogil:
    int fesetround(int mode)
    int fegetround()
    int FE_DOWNWARD
    int FE_UPWARD
    int FE_TONEAREST


cdef inline double _g_up(double x) noexcept nogil:
    # upper bound of x + sqrt(1 + x^2) (increasing in x); rounding mode: UP
    return x + sqrt(1.0 + x * x)

cdef inline double _g_dn(double x) noexcept nogil:
    # lower bound under rounding mode DOWN
    return x + sqrt(1.0 + x * x)


def scan_envelope(long n_lo, long n_hi, double kappa_lo, double kappa_hi,
                  double cm_lo, double cm_hi, double cp_lo, double cp_hi):
    """Scan n in [n_lo, n_hi]; return (max_failing_n, fail_count).

    Each exact parameter is passed as a double bracket [lo, hi]; every use
    picks the endpoint that keeps the pass verdict sufficient.
    """
    cdef long n, max_fail = 0, nfail = 0
    cdef int old = fegetround()
    cdef double nm1, np1, num_hi, num_lo, den_lo, den_hi
    cdef double xp_hi, xp_lo, xm_hi, xm_lo, f_lo, f_hi, d_hi, d_lo
    cdef double sbp_lo, sbm_hi, bm_hi, bp_lo
    cdef bint ok
    try:
        for n in range(n_lo, n_hi + 1):
            nm1 = <double> (n - 1)
            np1 = <double> (n + 1)

            # ---- check (1): lower(S(b+)) vs upper(b-)
            fesetround(FE_UPWARD)
            num_hi = cp_hi * sqrt(nm1 / 3.0) + cp_hi * sqrt(np1 / 3.0) - kappa_lo
            den_hi = 2.0 * sqrt(<double> n)
            fesetround(FE_DOWNWARD)
            den_lo = 2.0 * sqrt(<double> n)
            fesetround(FE_UPWARD)
            if num_hi >= 0.0:
                xp_hi = num_hi / den_lo
            else:
                xp_hi = num_hi / den_hi
            d_hi = _g_up(xp_hi)
            fesetround(FE_DOWNWARD)
            f_lo = 1.0 / d_hi
            sbp_lo = sqrt(<double> n) * f_lo
            fesetround(FE_UPWARD)
            bm_hi = cm_hi * sqrt((<double> n) / 3.0)
            ok = sbp_lo >= bm_hi

            if ok:
                # ---- check (2): upper(S(b-)) vs lower(b+)
                fesetround(FE_DOWNWARD)
                num_lo = cm_lo * sqrt(nm1 / 3.0) + cm_lo * sqrt(np1 / 3.0) - kappa_hi
                if num_lo >= 0.0:
                    xm_lo = num_lo / den_hi
                else:
                    xm_lo = num_lo / den_lo
                d_lo = _g_dn(xm_lo)
                fesetround(FE_UPWARD)
                f_hi = 1.0 / d_lo
                sbm_hi = sqrt(<double> n) * f_hi
                fesetround(FE_DOWNWARD)
                bp_lo = cp_lo * sqrt((<double> n) / 3.0)
                ok = sbm_hi <= bp_lo

            if ok:
                # ---- check (3): lower(x+) vs upper(x-)
                fesetround(FE_DOWNWARD)
                num_lo = cp_lo * sqrt(nm1 / 3.0) + cp_lo * sqrt(np1 / 3.0) - kappa_hi
                if num_lo >= 0.0:
                    xp_lo = num_lo / den_hi
                else:
                    xp_lo = num_lo / den_lo
                fesetround(FE_UPWARD)
                num_hi = cm_hi * sqrt(nm1 / 3.0) + cm_hi * sqrt(np1 / 3.0) - kappa_lo
                if num_hi >= 0.0:
                    xm_hi = num_hi / den_lo
                else:
                    xm_hi = num_hi / den_hi
                ok = xp_lo >= xm_hi

            if not ok:
                nfail += 1
                if n > max_fail:
                    max_fail = n
    finally:
        fesetround(old)
    return max_fail, nfail


IMPLEMENTATION = "compiled"
