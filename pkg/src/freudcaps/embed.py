"""Certified embedding constants for the quartic weight.

Three families of constants are produced from certified recurrence
coefficients:

* compactness constants C_alpha, theta (closed forms) and the tail constants
  C12, C22, C controlling the H1 -> L2 embedding of high modes;
* a two-sided enclosure of the optimal Poincare constant, combining a
  finite-section eigenvalue enclosure (certified similarity transform plus
  Gershgorin discs, Rayleigh quotient from below) with closed-form tail
  bounds assembled through an exact 2x2 spectral norm;
* an upper bound c on the first-order flux operator u -> -V'u + u' from
  H1 to L2, together with the sup-norm and H1(R) embedding constants
  derived from it.

All infinite tails are controlled through the envelope bounds
c^- sqrt(n/3) <= b_n <= c^+ sqrt(n/3); finite blocks are evaluated either in
extended-precision intervals (vectors) or in the rigorous float64
midpoint-radius engine (dense spectra).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from gmpy2 import mpfr

from freudcaps import fastivl
from freudcaps.fastivl import MR
from freudcaps.freud import FreudCoeffs
from freudcaps.ivlmath import (
    Ivl,
    PrecisionContext,
    enclose_weighted_integral,
    l2_norm_upper_2x2,
    vec_norm2,
)

__all__ = [
    "EmbeddingConstants",
    "PoincareResult",
    "FluxConstants",
    "compactness_constants",
    "tail_constants",
    "poincare_enclosure",
    "flux_bound",
]


@dataclass
class EmbeddingConstants:
    C_alpha: Ivl
    theta: Ivl
    C12: Ivl
    C22: Ivl
    C: Ivl
    n_split: int
    parity: str


@dataclass
class PoincareResult:
    lower: Ivl          # finite-section constant (certified enclosure)
    upper: Ivl          # upper bound on the full constant
    n: int


@dataclass
class FluxConstants:
    c: Ivl
    c_alpha_part: Ivl
    c_beta_part: Ivl
    Z: Ivl
    linf_const: Ivl | None = None
    h1R_const: Ivl | None = None


# ---------------------------------------------------------------------------
# closed-form compactness constants
# ---------------------------------------------------------------------------


def compactness_constants(coeffs: FreudCoeffs, N: int, c_plus) -> tuple[Ivl, Ivl]:
    """C_alpha = 3^(1/4)/sqrt(c^+) and
    theta = (c^+)^2/3 * ((1+1/M)(1+2/M))^(1/4) with M = N - 1; asserts the
    induced growth bounds alpha_n >= C_alpha n^(3/4), beta_n/alpha_n <= theta
    on all certified indices n >= N.  The ratio bound is decreasing in the
    index, so evaluating one step below N gives a margin above the exact
    supremum at no structural cost (theta stays well under 1)."""
    if N < coeffs.source.N:
        raise ValueError("N below the certified crossover index")
    ctx = coeffs.ctx()
    cp = ctx.ivl(Fraction(c_plus))
    C_alpha = ctx.ivl(3).root4() / cp.sqrt()
    grow = (ctx.one() + ctx.ivl(Fraction(1, N - 1))) \
        * (ctx.one() + ctx.ivl(Fraction(2, N - 1)))
    theta = cp * cp / ctx.ivl(3) * grow.root4()
    if not theta.hi < 1:
        raise ArithmeticError("theta >= 1: tail constants undefined")
    for n in range(N, coeffs.length + 1):
        n34 = ctx.ivl(n).ipow(3).root4()
        if not coeffs.alpha[n].lo >= (C_alpha * n34).hi:
            raise ArithmeticError(f"alpha growth bound fails at n={n}")
        if not (coeffs.beta[n] / coeffs.alpha[n]).hi <= theta.lo:
            raise ArithmeticError(f"beta/alpha bound fails at n={n}")
    return C_alpha, theta


# ---------------------------------------------------------------------------
# parity blocks and bidiagonal machinery
# ---------------------------------------------------------------------------


def _block_indices(parity: str, n_max: int, include_zero: bool) -> list[int]:
    start = 0 if parity == "even" else 1
    if parity == "even" and not include_zero:
        start = 2
    return list(range(start, n_max + 1, 2))


def _p_block(coeffs: FreudCoeffs, idxs) -> tuple[list, list]:
    """(diagonal, superdiagonal) of the parity-restricted change-of-basis
    block over the given indices (entry alpha_i on the diagonal, beta_i on
    the coupling, and the exact 1 for index 0)."""
    ctx = coeffs.ctx()
    diag = [ctx.one() if i == 0 else coeffs.alpha[i] for i in idxs]
    sup = [ctx.zero() if i == 0 else coeffs.beta[i] for i in idxs[:-1]]
    return diag, sup


def _last_column_inverse(diag, sup) -> list:
    """Last column of the inverse of the upper-bidiagonal matrix, by exact
    interval back-substitution."""
    n = len(diag)
    x = [None] * n
    x[n - 1] = 1 / diag[n - 1]
    for i in range(n - 2, -1, -1):
        x[i] = -(sup[i] * x[i + 1]) / diag[i]
    return x


def _ivl_to_mr(values) -> MR:
    lo = np.array([math.nextafter(float(v.lo), -math.inf) for v in values])
    hi = np.array([math.nextafter(float(v.hi), math.inf) for v in values])
    return MR.from_lohi(lo, hi)


def _bidiag_inverse_mr(diag, sup) -> MR:
    """Dense enclosure of the inverse of an upper-bidiagonal interval matrix
    in the float64 midpoint-radius engine, assembled diagonal by diagonal:
    (B^-1)_{i,i+t} = prod_{l=i}^{i+t-1}(-s_l/d_l) / d_{i+t}."""
    n = len(diag)
    d = _ivl_to_mr(diag)
    invd = 1.0 / d
    mid = np.zeros((n, n))
    rad = np.zeros((n, n))
    ii = np.arange(n)
    mid[ii, ii] = invd.mid
    rad[ii, ii] = invd.rad
    if n > 1:
        r = -(_ivl_to_mr(sup) / MR(d.mid[:-1], d.rad[:-1]))
        prod = MR(np.ones(n - 1))  # running prod over l = i..i+t-1
        for t in range(1, n):
            if t == 1:
                prod = r
            else:
                prod = MR(r.mid[: n - t], r.rad[: n - t]) \
                    * MR(prod.mid[1:], prod.rad[1:])
            e = prod * MR(invd.mid[t:], invd.rad[t:])
            i = np.arange(n - t)
            mid[i, i + t] = e.mid
            rad[i, i + t] = e.rad
            if np.max(np.abs(e.mid) + e.rad) == 0.0:
                break
    return MR(mid, rad)


def _lambda_max_sq(B: MR) -> tuple[float, float, np.ndarray]:
    """Enclosure of the largest eigenvalue of B B^T (= largest squared
    singular value of B): numeric diagonalization, certified similarity,
    Gershgorin discs from above, Rayleigh quotient from below.  Also returns
    the numeric top eigenvector for sharper downstream Rayleigh bounds."""
    from scipy.linalg import eigh

    G = B @ B.T
    w, Q = eigh((G.mid + G.mid.T) / 2.0)
    Qi = fastivl.certified_inverse_fast(MR(Q))
    Lam = Qi @ G @ MR(Q)
    centers, radii = fastivl.gershgorin_discs(Lam)
    hi = float(np.max(centers + radii))
    v = Q[:, int(np.argmax(w))]
    lo = fastivl.rayleigh_lower(G, v)
    return lo, hi, v


def _rayleigh_lower_bidiag(diag, sup, v, ctx: PrecisionContext,
                           weights=None) -> Ivl:
    """Rayleigh-quotient lower bound for lambda_max(B B^T) with
    B = diag(weights) L^-1 and L the given upper-bidiagonal matrix:
    quotient = ||L^-T (w .* v)||^2 / ||v||^2 via an O(n) interval forward
    substitution, so the bound is as sharp as the trial vector allows
    instead of being limited by float64 accumulation."""
    n = len(diag)
    vi = [ctx.ivl(Fraction(float(x))) for x in v]
    rhs = vi if weights is None else [w * x for w, x in zip(weights, vi)]
    u = [None] * n
    u[0] = rhs[0] / diag[0]
    for i in range(1, n):
        u[i] = (rhs[i] - sup[i - 1] * u[i - 1]) / diag[i]
    q = vec_norm2(u) / vec_norm2(vi)
    return q * q


def _float_pair_to_ivl(lo: float, hi: float, ctx: PrecisionContext) -> Ivl:
    return Ivl(ctx.mpfr_down(Fraction(lo)), ctx.mpfr_up(Fraction(hi)), ctx)


def _pow34(x: Ivl) -> Ivl:
    return x.ipow(3).root4()


def _ivl_max(a: Ivl, b: Ivl) -> Ivl:
    """Enclosure of max(x, y) for x in a, y in b."""
    return Ivl(max(a.lo, b.lo), max(a.hi, b.hi), a.ctx)


# ---------------------------------------------------------------------------
# tail constants (compact embedding)
# ---------------------------------------------------------------------------


def tail_constants(coeffs: FreudCoeffs, n_split: int, C_alpha: Ivl,
                   theta: Ivl, parity: str) -> tuple[Ivl, Ivl, Ivl]:
    """Constants (C12, C22, C) of the high-mode embedding bound
    ||P^-1 v|| <= C m^(-3/4) for v supported beyond mode m >= n_split:
    C12 = beta_l ||(Pbar^-1)_{:,-1}|| / (C_alpha sqrt(1-theta^2)) with l the
    last kept index of the parity, C22 = 1/(C_alpha (1-theta)),
    C = sqrt(C12^2 + C22^2)."""
    if n_split < coeffs.source.N:
        raise ValueError("n_split below the certified crossover index")
    ctx = coeffs.ctx()
    if not theta.hi < 1:
        raise ArithmeticError("theta >= 1")
    idxs = _block_indices(parity, n_split, include_zero=True)
    last = idxs[-1]
    diag, sup = _p_block(coeffs, idxs)
    col = _last_column_inverse(diag, sup)
    col_norm = vec_norm2(col)
    one = ctx.one()
    C12 = coeffs.beta[last] * col_norm \
        / (C_alpha * (one - theta * theta).sqrt())
    C22 = one / (C_alpha * (one - theta))
    C = (C12 * C12 + C22 * C22).sqrt()
    return C12, C22, C


def embedding_constants(coeffs: FreudCoeffs, N: int, n_split: int,
                        c_plus, parity: str) -> EmbeddingConstants:
    C_alpha, theta = compactness_constants(coeffs, N, c_plus)
    C12, C22, C = tail_constants(coeffs, n_split, C_alpha, theta, parity)
    return EmbeddingConstants(C_alpha, theta, C12, C22, C, n_split, parity)


# ---------------------------------------------------------------------------
# Poincare constant
# ---------------------------------------------------------------------------


def _poincare_parity(coeffs: FreudCoeffs, n: int, C_alpha: Ivl | None,
                     theta: Ivl | None, parity: str) -> tuple[Ivl, Ivl | None]:
    """(finite-section enclosure, full upper bound) for one parity block.

    Without tail constants (C_alpha/theta None) only the finite-section value
    is computed and the upper bound is None."""
    ctx = coeffs.ctx()
    idxs = _block_indices(parity, n, include_zero=False)
    last = idxs[-1]
    diag, sup = _p_block(coeffs, idxs)
    Linv = _bidiag_inverse_mr(diag, sup)
    lo, hi, v = _lambda_max_sq(Linv)
    ray = _rayleigh_lower_bidiag(diag, sup, v, ctx)
    cbar = Ivl(max(ray.lo, ctx.mpfr_down(Fraction(lo))),
               ctx.mpfr_up(Fraction(hi)), ctx)
    if C_alpha is None:
        return cbar, None

    one = ctx.one()
    tail_start = _pow34(ctx.ivl(last + 2))
    first_row = one / (C_alpha * (one - theta * theta).sqrt() * tail_start)
    tail_norm = one / (C_alpha * (one - theta) * tail_start)
    col = _last_column_inverse(diag, sup)
    t12 = coeffs.beta[last] * vec_norm2(col) * first_row
    upper = l2_norm_upper_2x2(cbar.sqrt(), t12, ctx.zero(), tail_norm)
    return cbar, upper * upper


def poincare_enclosure(coeffs: FreudCoeffs, n: int) -> PoincareResult:
    """Two-sided enclosure of the optimal Poincare constant.

    The constant is the squared norm of the inverse of the mean-zero part of
    the change-of-basis operator, which decouples into parity blocks; the
    result takes the maximum over both parities (the odd block is the
    dominant one for the double-well regime).

    Below the certified growth threshold the tail coupling cannot be bounded,
    so for n < N only the finite-section lower value is returned and
    ``upper`` is None (still a rigorous lower bound on the constant)."""
    src = coeffs.source
    if coeffs.length < n + 1:
        raise ValueError("coefficients too short for this block size")
    if n >= src.N:
        C_alpha, theta = compactness_constants(coeffs, src.N,
                                               src.params.c_plus)
    else:
        C_alpha = theta = None
    lo_e, up_e = _poincare_parity(coeffs, n, C_alpha, theta, "even")
    lo_o, up_o = _poincare_parity(coeffs, n, C_alpha, theta, "odd")
    lower = _ivl_max(lo_e, lo_o)
    if C_alpha is None:
        return PoincareResult(lower, None, n)
    upper = _ivl_max(up_e, up_o)
    if lower.hi > upper.hi:
        raise ArithmeticError("inconsistent finite-section/upper bounds")
    return PoincareResult(lower, upper, n)


# ---------------------------------------------------------------------------
# flux-operator bound
# ---------------------------------------------------------------------------


def _flux_parity(coeffs: FreudCoeffs, n_split: int, c_minus, c_plus,
                 theta: Ivl, C_alpha: Ivl, parity: str) -> tuple[Ivl, Ivl]:
    """(alpha part, beta part) of the flux bound for one parity block."""
    ctx = coeffs.ctx()
    cm = ctx.ivl(Fraction(c_minus))
    cp = ctx.ivl(Fraction(c_plus))
    one = ctx.one()
    idxs = _block_indices(parity, n_split, include_zero=True)
    last = idxs[-1]
    diag, sup = _p_block(coeffs, idxs)
    Pinv = _bidiag_inverse_mr(diag, sup)
    col = _last_column_inverse(diag, sup)

    tail_start = _pow34(ctx.ivl(last + 2))
    first_row = one / (C_alpha * (one - theta * theta).sqrt() * tail_start)

    parts = []
    for kind in ("alpha", "beta"):
        w = [coeffs.alpha[i + 1] if kind == "alpha" else coeffs.beta[i + 1]
             for i in idxs]
        wmr = _ivl_to_mr(w)
        B = MR(wmr.mid.reshape(-1, 1), wmr.rad.reshape(-1, 1)) * Pinv
        lo, hi, _ = _lambda_max_sq(B)
        t11 = _float_pair_to_ivl(max(lo, 0.0), hi, ctx).sqrt()
        wcol = [wi * ci for wi, ci in zip(w, col)]
        t12 = coeffs.beta[last] * vec_norm2(wcol) * first_row
        if kind == "alpha":
            # sup over tail columns m >= last+2 of alpha_{m+1}/alpha_m
            ratio = (cp / cm).sqrt() \
                * _pow34(ctx.ivl(Fraction(last + 3, last + 2)))
        else:
            # sup over tail columns m >= last+2 of beta_{m+1}/alpha_m
            ratio = cp * cp / ctx.ivl(3) \
                * _pow34(ctx.ivl(Fraction(last + 5, last + 2)))
        t22 = ratio / (one - theta)
        parts.append(l2_norm_upper_2x2(t11, t12, ctx.zero(), t22))
    return parts[0], parts[1]


def flux_bound(coeffs: FreudCoeffs, n_split: int, c_minus, c_plus,
               theta: Ivl, C_alpha: Ivl, *,
               C_P: Ivl | None = None) -> FluxConstants:
    """Upper bound c on the H1 -> L2 norm of u -> -V'u + u'.

    The operator splits into a diagonal-alpha and a diagonal-beta weighted
    copy of the basis-change inverse; each part is bounded by an exact 2x2
    spectral norm combining the finite-section norm with envelope tail
    bounds, and the two parities are combined by taking the maximum.  If an
    enclosure of the Poincare constant is supplied, the sup-norm and H1(R)
    embedding constants are derived as well.
    """
    if not theta.hi < 1:
        raise ArithmeticError("theta >= 1")
    ctx = coeffs.ctx()
    ca_e, cb_e = _flux_parity(coeffs, n_split, c_minus, c_plus, theta,
                              C_alpha, "even")
    ca_o, cb_o = _flux_parity(coeffs, n_split, c_minus, c_plus, theta,
                              C_alpha, "odd")
    c_alpha_part = _ivl_max(ca_e, ca_o)
    c_beta_part = _ivl_max(cb_e, cb_o)
    c = _ivl_max(ca_e + cb_e, ca_o + cb_o)
    kappa_q = Fraction(
        int(coeffs.kappa.lo.as_integer_ratio()[0]),
        int(coeffs.kappa.lo.as_integer_ratio()[1]),
    )
    Z = enclose_weighted_integral([1], kappa_q, 2, ctx)
    linf = h1r = None
    if C_P is not None:
        one = ctx.one()
        mcp = _ivl_max(one, C_P)
        linf = (Z * (c + one)).sqrt() * mcp.root4()
        h1r = Z.sqrt() * (mcp + (c + one) * (c + one) / ctx.ivl(4)).sqrt()
    return FluxConstants(c, c_alpha_part, c_beta_part, Z, linf, h1r)
