"""Pure-numpy fallback for the envelope sandwich scan.

Round-to-nearest evaluation with conservative outward slop: every computed
comparison is padded by a margin that dominates the accumulated rounding
error (a handful of ulps per quantity, padded to 2^-44 relative plus an
absolute cancellation-aware term).  A reported pass is rigorous; failures are
conservative and re-examined at extended precision by the caller, exactly as
with the compiled kernel.
"""

from __future__ import annotations

import numpy as np

IMPLEMENTATION = "fallback"

_REL = 2.0 ** -44  # >> accumulated ~8 ulp relative error per quantity


def _scan_chunk(n, kappa_lo, kappa_hi, cm_lo, cm_hi, cp_lo, cp_hi):
    nm1 = np.sqrt((n - 1.0) / 3.0)
    np1 = np.sqrt((n + 1.0) / 3.0)
    sq = np.sqrt(n)
    den = 2.0 * sq
    # absolute error scale of the numerators (cancellation-aware)
    mag = cp_hi * (nm1 + np1) + abs(kappa_hi)
    pad = _REL * mag

    s2 = nm1 + np1
    xp_hi = (cp_hi * s2 - kappa_lo + pad) / den * (1.0 + _REL)
    xp_lo = (cp_lo * s2 - kappa_hi - pad) / den * (1.0 - _REL)
    xm_hi = (cm_hi * s2 - kappa_lo + pad) / den * (1.0 + _REL)
    xm_lo = (cm_lo * s2 - kappa_hi - pad) / den * (1.0 - _REL)

    # f(x) = 1/(x + sqrt(1+x^2)) is decreasing; g(x) = x + sqrt(1+x^2) increasing
    g_hi = (xp_hi + np.sqrt(1.0 + xp_hi * xp_hi)) * (1.0 + _REL)
    f_lo_p = (1.0 / g_hi) * (1.0 - _REL)
    g_lo = (xm_lo + np.sqrt(1.0 + xm_lo * xm_lo)) * (1.0 - _REL)
    f_hi_m = (1.0 / g_lo) * (1.0 + _REL)

    sbp_lo = sq * f_lo_p * (1.0 - _REL)
    sbm_hi = sq * f_hi_m * (1.0 + _REL)
    bm_hi = cm_hi * np.sqrt(n / 3.0) * (1.0 + _REL)
    bp_lo = cp_lo * np.sqrt(n / 3.0) * (1.0 - _REL)

    return (sbp_lo >= bm_hi) & (sbm_hi <= bp_lo) & (xp_lo >= xm_hi)


def scan_envelope(n_lo, n_hi, kappa_lo, kappa_hi, cm_lo, cm_hi, cp_lo, cp_hi,
                  chunk=1 << 20):
    """Scan n in [n_lo, n_hi]; return (max_failing_n, fail_count)."""
    max_fail = 0
    nfail = 0
    start = n_lo
    while start <= n_hi:
        stop = min(start + chunk - 1, n_hi)
        n = np.arange(start, stop + 1, dtype=np.float64)
        ok = _scan_chunk(n, kappa_lo, kappa_hi, cm_lo, cm_hi, cp_lo, cp_hi)
        bad = np.flatnonzero(~ok)
        if bad.size:
            nfail += int(bad.size)
            max_fail = max(max_fail, start + int(bad[-1]))
        start = stop + 1
    return max_fail, nfail
