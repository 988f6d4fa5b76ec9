"""Rigorous Gauss quadrature for the quartic weights e^{-(m/2)V}.

The weight e^{-(m/2)(x^4/4 - kappa x^2/2)} is brought to canonical quartic
form by x = s*y with s = (2/m)^(1/4), whose recurrence coefficients come from
the same certified forward recursion as the base family (run at the effective
coefficient kappa*sqrt(m/2)).  Nodes are the roots of the degree-N orthonormal
polynomial: refined by non-rigorous Newton iteration in high precision, then
certified a posteriori as disjoint sign-change intervals of the interval
three-term recurrence; the interior weight formula

    W_i = 1 / (a_N * p_N'(x_i) * p_{N-1}(x_i))

gives the weights of the orthonormality (probability) measure, with
p_N' = alpha_N p_{N-1} + beta_{N-2} p_{N-3}.  Only the positive half of the
node set is stored; the rule is applied symmetrically (an odd node count
contributes an exact node at the origin).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import gmpy2
import numpy as np
from gmpy2 import mpfr
from scipy.linalg import eigh_tridiagonal

from freudcaps import _cache
from freudcaps.freud import CoeffVec, FreudCoeffs
from freudcaps.ivlmath import (
    DenseIvlMatrix,
    Ivl,
    PrecisionContext,
    enclose_weighted_integral,
    ivl_from_decimal,
    ivl_to_decimal,
)
from freudcaps.painleve import PainleveParams, forward_enclosure

__all__ = [
    "QuadratureRule",
    "VandermondeBar",
    "rescale_weight",
    "freud_gauss_rule",
    "integrate_product",
    "orthonormality_defect",
    "build_nonlinearity",
    "build_vandermonde_bar",
    "write_rule",
    "read_rule",
]


@dataclass
class QuadratureRule:
    """Gauss rule for e^{-(m/2)V} in the canonical rescaled variable.

    ``nodes`` are the strictly positive roots (increasing); ``weights`` the
    matching probability-measure weights; an odd total node count adds the
    exact origin node with ``center_weight``.  ``s`` maps canonical y to the
    original variable x = s*y and ``Z`` is the total mass of e^{-(m/2)V} dx.
    """

    m: int
    kappa: Fraction
    N_nodes: int
    nodes: list
    weights: list
    center_weight: Ivl | None
    tilde_coeffs: FreudCoeffs
    s: Ivl
    Z: Ivl
    bits: int

    def ctx(self) -> PrecisionContext:
        return self.s.ctx

    def exactness_degree(self) -> int:
        return 2 * self.N_nodes - 1


@dataclass
class VandermondeBar:
    """Weight-regularized pseudo-Vandermonde matrix Diag(W)^(1/m) * M.

    Row i holds W_i^(1/m) p_j(s*y_i) over the stored positive nodes (the
    symmetric half and any origin node are handled by the consumers, which
    know the parity structure of their integrands).
    """

    Mbar: DenseIvlMatrix
    rule: QuadratureRule
    n: int


def rescale_weight(m: int, kappa, ctx: PrecisionContext | None = None):
    """Exact rescaling data (s, kappa_tilde) with s = (2/m)^(1/4) and
    kappa_tilde = sqrt(m/2) * kappa, so that e^{-(m/2)V(s y)} is the
    canonical quartic weight with coefficient kappa_tilde."""
    if m not in (2, 4, 6):
        raise ValueError("m must be one of 2, 4, 6")
    ctx = ctx or PrecisionContext(256)
    s = ctx.ivl(Fraction(2, m)).root4()
    kappa_tilde = ctx.ivl(Fraction(m, 2)).sqrt() * ctx.ivl(Fraction(kappa))
    return s, kappa_tilde


def _tilde_coeffs(params: PainleveParams, length: int, *,
                  start_bits: int = 1024,
                  width_frac: Fraction = Fraction(1, 10 ** 12),
                  work_bits: int | None = None) -> FreudCoeffs:
    """Finite-prefix coefficient enclosures for the rescaled weight.

    The interval forward recursion from the rigorously integrated initial
    value is containment-rigorous on any prefix, so no envelope machinery is
    needed for a finite coefficient table; precision escalation keeps the
    final widths far below the certification scale.  ``work_bits`` rounds the
    table outward into a smaller context once the recursion (which may need
    far higher precision to control wrapping) has converged, so downstream
    consumers pay only for the precision they actually need.
    """
    b, bits = forward_enclosure(params, length + 2, start_bits=start_bits,
                                width_frac=width_frac)
    ctx = PrecisionContext(work_bits if work_bits else bits)
    if work_bits and work_bits < bits:
        b = [b[0]] + [x.round_to(ctx) for x in b[1:]]
    a = [ctx.zero()] + [b[n].sqrt() for n in range(1, length + 3)]
    alpha = [ctx.zero()] + [ctx.ivl(n) / a[n] for n in range(1, length + 1)]
    beta = [ctx.zero()] + [a[n] * a[n + 1] * a[n + 2]
                           for n in range(1, length + 1)]
    return FreudCoeffs(params.kappa_ivl(ctx), length, a, alpha, beta, None)


def _eval_pn_pair_f(amid, N: int, x: mpfr, ctx):
    """(p_{N-3}, p_{N-1}, p_N) at a point, non-rigorous mpfr arithmetic."""
    p_prev, p_cur = mpfr(0), mpfr(1)
    p3 = None
    for k in range(N):
        if k == N - 3:
            p3 = p_cur
        p_next = ctx.div(ctx.sub(ctx.mul(x, p_cur), ctx.mul(amid[k], p_prev)),
                         amid[k + 1])
        p_prev, p_cur = p_cur, p_next
    return p3, p_prev, p_cur


def _eval_pn_tail_ivl(coeffs: FreudCoeffs, N: int, x: Ivl):
    """(p_{N-3}, p_{N-1}, p_N) at an interval point, rigorous."""
    ctx = x.ctx
    p_prev, p_cur = ctx.zero(), ctx.one()
    p3 = None
    for k in range(N):
        if k == N - 3:
            p3 = p_cur
        a_k = coeffs.a[k].round_to(ctx) if k else ctx.zero()
        p_next = (x * p_cur - a_k * p_prev) / coeffs.a[k + 1].round_to(ctx)
        p_prev, p_cur = p_cur, p_next
    return p3, p_prev, p_cur


def _newton_refine(amid, N: int, alpha_N, beta_N2, seed: float, ctx,
                   iters: int) -> mpfr:
    x = mpfr(seed)
    for _ in range(iters):
        p3, p1, p0 = _eval_pn_pair_f(amid, N, x, ctx)
        dp = ctx.add(ctx.mul(alpha_N, p1), ctx.mul(beta_N2, p3))
        x = ctx.sub(x, ctx.div(p0, dp))
    return x


def freud_gauss_rule(m: int, kappa, N_nodes: int,
                     ctx: PrecisionContext | None = None, *,
                     c_minus=Fraction(987, 1000), c_plus=Fraction(1025, 1000),
                     work_bits: int | None = None,
                     use_cache: bool = True) -> QuadratureRule:
    """Certified Gauss rule with N_nodes nodes for e^{-(m/2)V}.

    Pipeline: coefficient table for the rescaled weight, float64 Jacobi
    eigenvalue seeds, high-precision Newton polishing, then a posteriori
    certification of each positive root as a sign-change interval with
    pairwise disjointness; weights from the interior formula, all positive.

    ``work_bits`` pins the working precision of the build.  Large rules need
    it: interval evaluation of the degree-N recurrence amplifies coefficient
    widths by roughly a factor 10^(0.6 N), so both the coefficient widths and
    the arithmetic precision must scale with N for the node certification to
    close.  When set, the coefficient recursion is pushed to a width target
    matching 2^-work_bits and the returned enclosures live at work_bits.
    """
    kappa = Fraction(kappa)
    if N_nodes < 4:
        raise ValueError("need at least 4 nodes")
    ctx = ctx or PrecisionContext(work_bits if work_bits else 256)
    key = (m, str(kappa), N_nodes, ctx.bits, work_bits)
    if use_cache:
        got = _cache.load("gaussrule", key)
        if got is not None:
            return _rule_from_payload(got, m, kappa, N_nodes, ctx,
                                      c_minus, c_plus)

    params = PainleveParams(kappa, c_minus, c_plus, m)
    if work_bits:
        tc = _tilde_coeffs(params, N_nodes + 2, start_bits=work_bits,
                           width_frac=Fraction(1, 10 ** (work_bits * 3 // 10)),
                           work_bits=work_bits)
    else:
        tc = _tilde_coeffs(params, N_nodes + 2)
    wctx = tc.ctx()
    rule = _build_rule(m, kappa, N_nodes, tc, params, ctx, wctx)
    if use_cache:
        _cache.store("gaussrule", key, _rule_payload(rule))
    return rule


def _build_rule(m, kappa, N_nodes, tc, params, ctx, wctx) -> QuadratureRule:
    N = N_nodes
    amid = [x.mid() for x in tc.a[: N + 2]]
    # float64 seeds from the Jacobi matrix (positive half)
    af = np.array([float(x) for x in amid[1:N]])
    eigs = eigh_tridiagonal(np.zeros(N), af, eigvals_only=True)
    pos_seeds = sorted(x for x in eigs if x > 1e-9)
    n_pos = N // 2
    if len(pos_seeds) != n_pos:
        raise ArithmeticError("unexpected seed count from the Jacobi matrix")

    near = wctx.near
    alpha_N = tc.alpha[N].mid()
    beta_N2 = tc.beta[N - 2].mid()
    iters = max(4, int(math.log2(wctx.bits / 40)) + 3)

    nodes, weights = [], []
    for seed in pos_seeds:
        x = _newton_refine(amid, N, alpha_N, beta_N2, seed, near, iters)
        nodes.append(_certify_root(tc, N, x, wctx))
    for i in range(1, len(nodes)):
        if not nodes[i - 1].hi < nodes[i].lo:
            raise ArithmeticError("node enclosures not pairwise disjoint")

    aN = tc.a[N]
    for xi in nodes:
        p3, p1, _ = _eval_pn_tail_ivl(tc, N, xi)
        dp = tc.alpha[N] * p1 + tc.beta[N - 2] * p3
        w = wctx.one() / (aN * dp * p1)
        if not w.lo > 0:
            raise ArithmeticError("weight not certifiably positive")
        weights.append(w)

    center = None
    if N % 2 == 1:
        zero = wctx.zero()
        p3, p1, p0 = _eval_pn_tail_ivl(tc, N, zero)
        if not p0.contains(mpfr(0)):
            raise ArithmeticError("origin is not enclosed as a root")
        dp = tc.alpha[N] * p1 + tc.beta[N - 2] * p3
        center = wctx.one() / (aN * dp * p1)
        if not center.lo > 0:
            raise ArithmeticError("center weight not certifiably positive")

    # probability normalization: the symmetric weight sum must enclose 1
    total = wctx.zero()
    for w in weights:
        total = total + w + w
    if center is not None:
        total = total + center
    if not total.contains(mpfr(1)):
        raise ArithmeticError("weights do not sum to the total mass")

    s, _ = rescale_weight(m, kappa, wctx)
    Z = enclose_weighted_integral([1], kappa, m, wctx)

    rd = lambda v: v.round_to(ctx)
    return QuadratureRule(
        m=m, kappa=kappa, N_nodes=N,
        nodes=[rd(x) for x in nodes], weights=[rd(w) for w in weights],
        center_weight=rd(center) if center is not None else None,
        tilde_coeffs=tc, s=rd(s), Z=rd(Z), bits=wctx.bits)


def _certify_root(tc: FreudCoeffs, N: int, x: mpfr, wctx) -> Ivl:
    """Shrink-wrap a sign-change interval around the polished root.

    The starting half-width is set by the noise floor of the interval
    evaluation at the point itself (coefficient widths propagated through
    the recurrence) divided by the local slope, so certification succeeds
    in a couple of attempts regardless of the coefficient precision."""
    p3, p1, p0 = _eval_pn_tail_ivl(tc, N, wctx.ivl_point_mpfr(x))
    dp = tc.alpha[N] * p1 + tc.beta[N - 2] * p3
    slope = abs(float(dp.mid()))
    if not slope > 0:
        raise ArithmeticError("vanishing slope at a polished node")
    # magnitudes only (rigor comes from the sign evaluations below), but the
    # arithmetic must stay in mpfr: these scales underflow float64 at high
    # working precision
    w, pm = p0.width(), p0.mid()
    noise = w if w > -pm and w > pm else (pm if pm > 0 else -pm)
    scale = max(abs(float(x)), 1.0)
    floor = gmpy2.mul(mpfr(scale), gmpy2.exp2(-(3 * wctx.bits // 4)))
    delta = gmpy2.div(gmpy2.mul(mpfr(8.0), noise), mpfr(slope))
    if delta < floor:
        delta = floor
    for _ in range(80):
        lo = wctx.ivl_point_mpfr(wctx.down.sub(x, delta))
        hi = wctx.ivl_point_mpfr(wctx.up.add(x, delta))
        _, _, p_lo = _eval_pn_tail_ivl(tc, N, lo)
        _, _, p_hi = _eval_pn_tail_ivl(tc, N, hi)
        if (p_lo.hi < 0 and p_hi.lo > 0) or (p_lo.lo > 0 and p_hi.hi < 0):
            return Ivl(lo.lo, hi.hi, wctx)
        delta = wctx.up.mul(delta, mpfr(4))
        if float(delta) > 2.0 ** -16 * scale:
            break
    raise ArithmeticError("could not certify a sign change around a node")


def _poly_value(coeffs: FreudCoeffs, entries, x: Ivl) -> Ivl:
    """sum_j entries[j] p_j(x) by a single recurrence pass."""
    ctx = x.ctx
    acc = ctx.zero()
    p_prev, p_cur = ctx.zero(), ctx.one()
    for j, cj in enumerate(entries):
        nz = (cj.lo != 0 or cj.hi != 0) if isinstance(cj, Ivl) else cj != 0
        if nz:
            acc = acc + (cj if isinstance(cj, Ivl) else ctx.ivl(cj)) * p_cur
        if j + 1 < len(entries):
            a_j = coeffs.a[j].round_to(ctx) if j else ctx.zero()
            p_next = (x * p_cur - a_j * p_prev) / coeffs.a[j + 1].round_to(ctx)
            p_prev, p_cur = p_cur, p_next
    return acc


def integrate_product(rule: QuadratureRule, polys: list[CoeffVec], m: int,
                      coeffs: FreudCoeffs) -> Ivl:
    """Enclosure of the normalized integral of a product of P-basis
    polynomials against the probability measure e^{-(m/2)V} dx / Z.

    The factors are polynomials in the original variable (coefficients with
    respect to the base orthonormal family ``coeffs``); exactness requires
    the total degree to stay within 2 N_nodes - 1.
    """
    if m != rule.m:
        raise ValueError("rule was built for a different weight power")
    for v in polys:
        if v.basis != "P":
            raise ValueError("factors must be in the P basis")
    deg = sum(v.dim - 1 for v in polys)
    if deg > rule.exactness_degree():
        raise ValueError("total degree exceeds the rule's exactness")
    ctx = rule.ctx()
    sign = 1
    for v in polys:
        if v.parity == "odd":
            sign = -sign
        elif v.parity == "mixed":
            sign = 0
            break
    total = ctx.zero()
    for xi, w in zip(rule.nodes, rule.weights):
        x = rule.s * xi
        prod = ctx.one()
        for v in polys:
            prod = prod * _poly_value(coeffs, v.entries, x)
        if sign == 0:
            prod_m = ctx.one()
            for v in polys:
                prod_m = prod_m * _poly_value(coeffs, v.entries, -x)
            total = total + w * (prod + prod_m)
        elif sign == 1:
            total = total + (w + w) * prod
        # odd total parity: the symmetric pair cancels exactly
    if rule.center_weight is not None and sign != -1:
        prod = ctx.one()
        for v in polys:
            prod = prod * _poly_value(coeffs, v.entries, ctx.zero())
        total = total + rule.center_weight * prod
    return total


def orthonormality_defect(rule: QuadratureRule, kmax: int) -> mpfr:
    """max_{i,j <= kmax} |rule(p~_i p~_j) - delta_ij| for the rescaled
    family integrated against its own probability measure."""
    tc = rule.tilde_coeffs
    ctx = rule.ctx()
    if 2 * kmax > rule.exactness_degree():
        raise ValueError("kmax exceeds the rule's exactness")
    vals = []          # vals[node][j] = p~_j(y_node)
    for xi in rule.nodes:
        x = xi.round_to(ctx)
        row, p_prev, p_cur = [], ctx.zero(), ctx.one()
        for j in range(kmax + 1):
            row.append(p_cur)
            a_j = tc.a[j].round_to(ctx) if j else ctx.zero()
            p_next = (x * p_cur - a_j * p_prev) / tc.a[j + 1].round_to(ctx)
            p_prev, p_cur = p_cur, p_next
        vals.append(row)
    zrow = None
    if rule.center_weight is not None:
        zero = ctx.zero()
        zrow, p_prev, p_cur = [], ctx.zero(), ctx.one()
        for j in range(kmax + 1):
            zrow.append(p_cur)
            a_j = tc.a[j].round_to(ctx) if j else ctx.zero()
            p_next = (zero * p_cur - a_j * p_prev) / tc.a[j + 1].round_to(ctx)
            p_prev, p_cur = p_cur, p_next
    defect = mpfr(0)
    for i in range(kmax + 1):
        for j in range(i, kmax + 1):
            if (i + j) % 2 == 1:
                continue    # exact zero by symmetry of the rule
            acc = ctx.zero()
            for row, w in zip(vals, rule.weights):
                acc = acc + (w + w) * row[i] * row[j]
            if zrow is not None:
                acc = acc + rule.center_weight * zrow[i] * zrow[j]
            target = 1 if i == j else 0
            err = max(abs(float(ctx.up.sub(acc.hi, mpfr(target)))),
                      abs(float(ctx.up.sub(mpfr(target), acc.lo))))
            defect = max(defect, mpfr(err))
    return defect


def build_vandermonde_bar(rule: QuadratureRule, coeffs: FreudCoeffs,
                          n: int) -> VandermondeBar:
    """Diag(W)^(1/m) M over the positive nodes, M[i, j] = p_j(s*y_i).

    The weight factor is folded into the recurrence seed so intermediate
    values stay on the Christoffel scale."""
    ctx = rule.ctx()
    inv_m = ctx.one() / ctx.ivl(rule.m)
    rows = []
    for xi, w in zip(rule.nodes, rule.weights):
        x = rule.s * xi
        seed = (w.log() * inv_m).exp()
        row, p_prev, p_cur = [], ctx.zero(), seed
        for j in range(n):
            row.append(p_cur)
            a_j = coeffs.a[j].round_to(ctx) if j else ctx.zero()
            p_next = (x * p_cur - a_j * p_prev) / coeffs.a[j + 1].round_to(ctx)
            p_prev, p_cur = p_cur, p_next
        rows.append(row)
    return VandermondeBar(DenseIvlMatrix(rows, ctx), rule, n)


def build_nonlinearity(rule: QuadratureRule, coeffs: FreudCoeffs,
                       c: CoeffVec, n: int) -> DenseIvlMatrix:
    """G with G_ij = <p_i, e^{-V} u^2 p_j> in L2 of the base probability
    measure, u = sum c_k p_k, via the m = 4 rule:
    G = rho4 * sum_i W_i u(x_i)^2 p_i p_j with rho4 = Z_4 / Z_2."""
    if rule.m != 4:
        raise ValueError("the nonlinearity assembly needs the m = 4 rule")
    if c.basis != "P":
        raise ValueError("u must be given in the P basis")
    deg = 2 * (n - 1) + 2 * (c.dim - 1)
    if deg > rule.exactness_degree():
        raise ValueError("rule exactness too small for this block size")
    ctx = rule.ctx()
    Z2 = enclose_weighted_integral([1], _rational_kappa(coeffs), 2, ctx)
    rho4 = rule.Z / Z2

    even_u = c.parity == "even"
    if not even_u:
        raise ValueError("only even-parity u is supported")
    G = [[ctx.zero() for _ in range(n)] for _ in range(n)]
    for xi, w in zip(rule.nodes, rule.weights):
        x = rule.s * xi
        u = _poly_value(coeffs, c.entries, x)
        coef = (w + w) * u * u
        row, p_prev, p_cur = [], ctx.zero(), ctx.one()
        for j in range(n):
            row.append(p_cur)
            a_j = coeffs.a[j].round_to(ctx) if j else ctx.zero()
            p_next = (x * p_cur - a_j * p_prev) / coeffs.a[j + 1].round_to(ctx)
            p_prev, p_cur = p_cur, p_next
        for i in range(n):
            ci = coef * row[i]
            for j in range(i, n, 2):
                G[i][j] = G[i][j] + ci * row[j]
    if rule.center_weight is not None:
        u = _poly_value(coeffs, c.entries, ctx.zero())
        coef = rule.center_weight * u * u
        row, p_prev, p_cur = [], ctx.zero(), ctx.one()
        zero = ctx.zero()
        for j in range(n):
            row.append(p_cur)
            a_j = coeffs.a[j].round_to(ctx) if j else ctx.zero()
            p_next = (zero * p_cur - a_j * p_prev) / coeffs.a[j + 1].round_to(ctx)
            p_prev, p_cur = p_cur, p_next
        for i in range(0, n, 2):
            ci = coef * row[i]
            for j in range(i, n, 2):
                G[i][j] = G[i][j] + ci * row[j]
    for i in range(n):
        for j in range(i, n, 2):
            v = G[i][j] * rho4
            G[i][j] = v
            G[j][i] = v
    return DenseIvlMatrix(G, ctx)


def _rational_kappa(coeffs: FreudCoeffs) -> Fraction:
    if coeffs.source is None:
        raise ValueError("base coefficients carry no exact weight parameter")
    return coeffs.source.params.kappa


# ---------------------------------------------------------------------------
# decimal persistence
# ---------------------------------------------------------------------------


def write_rule(path, rule: QuadratureRule, digits: int = 40) -> None:
    """Outward-rounded decimal node/weight table with a header line."""
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"# m={rule.m} kappa={rule.kappa} "
                 f"N_nodes={rule.N_nodes} bits={rule.bits}\n")
        if rule.center_weight is not None:
            lo, hi = ivl_to_decimal(rule.center_weight, digits)
            fh.write(f"0 0.0e+00 0.0e+00 {lo} {hi}\n")
        for i, (x, w) in enumerate(zip(rule.nodes, rule.weights), start=1):
            xlo, xhi = ivl_to_decimal(x, digits)
            wlo, whi = ivl_to_decimal(w, digits)
            fh.write(f"{i} {xlo} {xhi} {wlo} {whi}\n")


def read_rule_table(path, ctx: PrecisionContext):
    """(nodes, weights, center_weight) from a decimal table file."""
    nodes, weights, center = [], [], None
    with open(path, encoding="ascii") as fh:
        for line in fh:
            if line.startswith("#") or not line.strip():
                continue
            idx, xlo, xhi, wlo, whi = line.split()
            w = ivl_from_decimal(wlo, whi, ctx)
            if idx == "0":
                center = w
            else:
                nodes.append(ivl_from_decimal(xlo, xhi, ctx))
                weights.append(w)
    return nodes, weights, center


read_rule = read_rule_table


# ---------------------------------------------------------------------------
# cache payloads
# ---------------------------------------------------------------------------


def _rule_payload(rule: QuadratureRule) -> dict:
    tc = rule.tilde_coeffs
    return {
        "nodes": [[x.lo, x.hi] for x in rule.nodes],
        "weights": [[w.lo, w.hi] for w in rule.weights],
        "center": ([rule.center_weight.lo, rule.center_weight.hi]
                   if rule.center_weight is not None else None),
        "s": [rule.s.lo, rule.s.hi],
        "Z": [rule.Z.lo, rule.Z.hi],
        "bits": rule.bits,
        "tc_bits": tc.ctx().bits,
        "tc_a": [[x.lo, x.hi] for x in tc.a],
    }


def _rule_from_payload(got, m, kappa, N_nodes, ctx, c_minus, c_plus):
    wctx = PrecisionContext(got["tc_bits"])
    params = PainleveParams(kappa, c_minus, c_plus, m)
    a = [Ivl(lo, hi, wctx) for lo, hi in got["tc_a"]]
    length = len(a) - 3
    alpha = [wctx.zero()] + [wctx.ivl(n) / a[n] for n in range(1, length + 1)]
    beta = [wctx.zero()] + [a[n] * a[n + 1] * a[n + 2]
                            for n in range(1, length + 1)]
    tc = FreudCoeffs(params.kappa_ivl(wctx), length, a, alpha, beta, None)
    return QuadratureRule(
        m=m, kappa=kappa, N_nodes=N_nodes,
        nodes=[Ivl(lo, hi, ctx) for lo, hi in got["nodes"]],
        weights=[Ivl(lo, hi, ctx) for lo, hi in got["weights"]],
        center_weight=(Ivl(*got["center"], ctx) if got["center"] else None),
        tilde_coeffs=tc,
        s=Ivl(*got["s"], ctx), Z=Ivl(*got["Z"], ctx), bits=got["bits"])
