"""Rigorous enclosure of integrals of poly(x) * exp(-(m/2)(x^4/4 - kappa x^2/2)).

Strategy: the integrand is entire, so on each panel [A, B] the factor
exp(w(x)) is expanded as a Taylor series about the midpoint using the ODE
recursion k*y_k = sum_j j*w_j*y_{k-j} (w is the quartic exponent shifted to
the midpoint), each term is integrated exactly, and the truncation error is
bounded by a Cauchy estimate: |y_k| <= exp(sum_j |w_j| r^j) / r^k with
r = panel width, giving a geometric tail of ratio 1/2.  Beyond a cutoff X the
exponent is dominated by -lambda x^2 with lambda = (m/2)(X^2/4 - kappa/2) and
the tail is bounded through the exact recursion
int_X^inf x^l e^{-lambda x^2} dx = X^{l-1} e^{-lambda X^2}/(2 lambda)
+ (l-1)/(2 lambda) * (the l-2 integral).

Odd monomials integrate to exactly zero by symmetry and are dropped.
"""

from __future__ import annotations

from fractions import Fraction

import gmpy2
from gmpy2 import mpfr

__all__ = ["enclose_weighted_integral", "choose_cutoff"]


def choose_cutoff(m, kappa_hi: Fraction, bits: int) -> int:
    """Smallest integer X with (m/2)(X^4/4 - kappa X^2/2) >= X^2 + margin.

    The margin 0.694*bits makes exp(-(m/2)V(X)) <= 2^-bits * e^{-X^2}, so the
    Gaussian-dominated tail is negligible at the working precision.  Also
    enforces X^2/4 - kappa/2 >= 1 so the domination rate lambda is positive.
    """
    m = Fraction(m)
    kappa_hi = Fraction(kappa_hi)
    margin = Fraction(694, 1000) * bits + 40
    X = 2
    while True:
        lhs = (m / 2) * (Fraction(X) ** 4 / 4 - kappa_hi * X * X / 2)
        if lhs >= X * X + margin and Fraction(X * X, 4) - kappa_hi / 2 >= 1:
            return X
        X += 1


def _taylor_shift(coeffs, x0, ctx):
    """Coefficients of p(x0 + t) given interval coefficients of p(x)."""
    out = list(coeffs)
    n = len(out)
    x0i = ctx.ivl_point_mpfr(x0)
    for i in range(n - 1):
        for j in range(n - 2, i - 1, -1):
            out[j] = out[j] + x0i * out[j + 1]
    return out


def enclose_weighted_integral(poly, kappa, m, ctx, *, target_width=None):
    """Enclose the real-line integral of poly(x)*exp(-(m/2)(x^4/4-k x^2/2)).

    Parameters
    ----------
    poly : sequence of interval (or exact rational) coefficients, index = power
    kappa : Ivl (or exact rational)
    m : exact rational scale of the exponent
    ctx : PrecisionContext
    target_width : optional; raise if the final enclosure is wider than this
    """
    from freudcaps.ivlmath import Ivl

    if not isinstance(kappa, Ivl):
        kappa = ctx.ivl(kappa)
    coeffs = [c if isinstance(c, Ivl) else ctx.ivl(c) for c in poly]
    while coeffs and coeffs[-1].lo == 0 and coeffs[-1].hi == 0:
        coeffs.pop()
    if not coeffs:
        return ctx.zero()
    # odd part integrates to exactly zero over the symmetric line
    even = [c if l % 2 == 0 else ctx.zero() for l, c in enumerate(coeffs)]
    if all(c.lo == 0 and c.hi == 0 for c in even):
        return ctx.zero()

    m = Fraction(m)
    bits = ctx.bits
    num, den = kappa.hi.as_integer_ratio()
    X = choose_cutoff(m, Fraction(int(num), int(den)), bits)

    # exponent w(x) = a4 x^4 + a2 x^2
    a4 = ctx.ivl(-m / 8)
    a2 = kappa * ctx.ivl(m / 4)

    K = (4 * (bits + 80)) // 3 + 8
    # Cauchy-estimate budget: exp factor <= 2^(K/4) keeps error ~ 2^(-3K/4)
    s_max = ctx.ivl(Fraction(693, 1000)) * ctx.ivl(Fraction(K, 4))

    half = ctx.ivl(Fraction(1, 2))
    two = ctx.ivl(2)
    three = ctx.ivl(3)
    four = ctx.ivl(4)
    six = ctx.ivl(6)

    total = ctx.zero()
    stack = [(mpfr(0), ctx.mpfr_up(X))]
    guard = 0
    while stack:
        guard += 1
        if guard > 100000:
            raise RuntimeError("panel subdivision did not terminate")
        A, B = stack.pop()
        x0 = ctx.near.mul(ctx.near.add(A, B), mpfr("0.5"))
        x0i = ctx.ivl_point_mpfr(x0)
        h = ctx.ivl_point_mpfr(B) - ctx.ivl_point_mpfr(A)
        # shifted exponent coefficients W_j of w(x0 + t)
        x0_2 = x0i * x0i
        W0 = a4 * x0_2 * x0_2 + a2 * x0_2
        W1 = four * a4 * x0_2 * x0i + two * a2 * x0i
        W2 = six * a4 * x0_2 + a2
        W3 = four * a4 * x0i
        W4 = a4
        r = h  # Cauchy radius = panel width; |t| <= h/2 gives ratio 1/2
        r2 = r * r
        s = abs(W1) * r + abs(W2) * r2 + abs(W3) * r2 * r + abs(W4) * r2 * r2
        if s.hi > s_max.lo and float(h.hi) > 2.0 ** -20:
            mid = ctx.near.mul(ctx.near.add(A, B), mpfr("0.5"))
            stack.append((A, mid))
            stack.append((mid, B))
            continue
        # Taylor coefficients of exp(w(x0+t) - W0) via y' = (w' shifted) y
        p_sh = _taylor_shift(even, x0, ctx)
        degp = len(p_sh) - 1
        h2 = h * half
        # running accumulators: integral contribution per poly power l
        contrib = ctx.zero()
        y = [ctx.one()]
        jW = [None, W1, two * W2, three * W3, four * W4]
        pw = [h2.ipow(l) for l in range(degp + 1)]  # (h/2)^l
        pk = h2  # (h/2)^(k+1), starts at k = 0
        for k in range(K):
            if k > 0:
                acc = jW[1] * y[k - 1]
                if k >= 2:
                    acc = acc + jW[2] * y[k - 2]
                if k >= 3:
                    acc = acc + jW[3] * y[k - 3]
                if k >= 4:
                    acc = acc + jW[4] * y[k - 4]
                y.append(acc / k)
            yk = y[k]
            for l in range(degp + 1):
                kl = k + l
                if kl % 2 == 0:
                    pl = p_sh[l]
                    if pl.lo != 0 or pl.hi != 0:
                        contrib = contrib + pl * yk * pk * pw[l] * ctx.ivl(
                            Fraction(2, kl + 1)
                        )
            pk = pk * h2
        # Cauchy remainder: sum_{k>=K} |y_k| (h/2)^k <= e^s * 2^(1-K)
        p_mag = ctx.zero()
        for l in range(degp + 1):
            p_mag = p_mag + ctx.ivl_point_mpfr(p_sh[l].mag()) * pw[l]
        err = (h * p_mag * Ivl(mpfr(0), s.hi, ctx).exp()).hi
        err = ctx.up.mul(err, ctx.up.exp2(mpfr(1 - K)))
        panel = W0.exp() * (contrib + Ivl(ctx.down.minus(err), err, ctx))
        total = total + panel

    total = total * two  # [0, X] doubled to [-X, X]

    # analytic tail beyond X
    lam = ctx.ivl(m / 2) * (ctx.ivl(Fraction(X * X, 4)) - kappa * half)
    if lam.lo <= 0:
        raise ArithmeticError("tail domination rate not positive")
    Xi = ctx.ivl(X)
    eX = (-(lam * Xi * Xi)).exp()
    inv2l = ctx.one() / (two * lam)
    I = {}
    I[0] = Ivl(mpfr(0), (eX * inv2l / Xi).hi, ctx)
    I[1] = Ivl(mpfr(0), (eX * inv2l).hi, ctx)
    tail = ctx.zero()
    maxdeg = len(even) - 1
    for l in range(2, maxdeg + 1):
        I[l] = Xi.ipow(l - 1) * eX * inv2l + ctx.ivl(l - 1) * inv2l * I[l - 2]
    t_hi = mpfr(0)
    for l, c in enumerate(even):
        if c.lo != 0 or c.hi != 0:
            t_hi = ctx.up.add(t_hi, (ctx.ivl_point_mpfr(c.mag()) * I[l] * two).hi)
    total = total + Ivl(ctx.down.minus(t_hi), t_hi, ctx)

    if target_width is not None:
        w = total.width()
        if w > ctx.mpfr_up(target_width):
            raise RuntimeError(f"integral enclosure width {w} exceeds target")
    return total
