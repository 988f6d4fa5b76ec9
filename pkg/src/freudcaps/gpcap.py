"""Newton-Kantorovich certification of even stationary states of a cubic
Schrodinger-type equation with quartic confinement.

The unknown is sought in the weighted Sobolev space spanned by the Sobolev
orthogonal family {q_j}: after inverting the positive self-adjoint part of
the linearization, the problem becomes a fixed-point equation for the
coefficient sequence.  An approximate solution ubar is found on the first
n+1 even modes by damped Newton iteration in float64; rigor then enters
through four certified bounds,

    Y   >= || A (ubar - T(ubar)) ||            (defect at ubar),
    Z1  >= || A (I - DT) ||  on the ball        (first-order loss),
    Z2, Z3                                      (curvature of the cubic term),

from which the radii polynomials Q(delta) and R(delta) isolate an interval
(delta_lo, delta_hi) of contraction radii: a certified negative value of Q
proves a genuine solution within delta of ubar in the H1 norm of the
weighted space.  Sup-norm and H1(R) error bounds, and a pointwise positivity
check of the physical profile e^{-V/2} ubar, convert the abstract ball into
statements about the solution itself.

Large dense reductions (pseudo-Vandermonde products, the nonlinearity Gram
matrix, the finite-section Jacobian) run in the float64 midpoint-radius
engine; the node-evaluation matrices themselves are assembled once in MPFR
interval arithmetic at the quadrature rule's working precision, rounded
outward into float64, and cached on disk.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from gmpy2 import mpfr
from scipy.linalg import eigh_tridiagonal

from freudcaps import _cache, fastivl
from freudcaps.embed import (
    FluxConstants,
    _bidiag_inverse_mr,
    _block_indices,
    _float_pair_to_ivl,
    _ivl_max,
    _ivl_to_mr,
    _p_block,
    compactness_constants,
    flux_bound,
    poincare_enclosure,
    tail_constants,
)
from freudcaps.fastivl import MR
from freudcaps.freud import CoeffVec, FreudCoeffs, coeffs_from_enclosure
from freudcaps.ivlmath import (
    Ivl,
    PrecisionContext,
    enclose_weighted_integral,
    l2_norm_upper_2x2,
)
from freudcaps.painleve import PainleveParams, certify
from freudcaps.quad import QuadratureRule, _tilde_coeffs, freud_gauss_rule

__all__ = [
    "GPParams",
    "ApproxSolution",
    "ProofBounds",
    "RadiiResult",
    "ProofConstants",
    "check_params",
    "seed_vector",
    "newton_solve",
    "truncate_solution",
    "proof_constants",
    "build_An",
    "bound_Y",
    "bound_Z1",
    "bound_Z2_Z3",
    "radii",
    "positivity_check",
    "h1R_error",
]

_CMINUS = Fraction(987, 1000)
_CPLUS = Fraction(1025, 1000)


# ---------------------------------------------------------------------------
# domain types
# ---------------------------------------------------------------------------


@dataclass
class GPParams:
    """Equation parameters: potential V = x^4/4 - kappa x^2/2, effective
    sextic well W = (V')^2/4 - V''/2 + c x^2 + d, frequency omega.

    The linear part is exactly the Sobolev-inner-product operator when the
    residual polynomial (6 + 4c - kappa^2) x^2 / 4 + (2d - kappa)/2
    vanishes identically; ``check_params`` tests that."""

    kappa: Fraction
    c: Fraction
    d: Fraction
    omega: Fraction

    def __post_init__(self):
        self.kappa = Fraction(self.kappa)
        self.c = Fraction(self.c)
        self.d = Fraction(self.d)
        self.omega = Fraction(self.omega)

    @classmethod
    def standard(cls, kappa=4, omega=8) -> "GPParams":
        """Parameters with the residual polynomial identically zero."""
        kappa = Fraction(kappa)
        return cls(kappa, (kappa * kappa - 6) / 4, kappa / 2, Fraction(omega))


@dataclass
class ApproxSolution:
    """Approximate even solution: Q-basis coefficients of the first n+1
    modes (odd entries exactly zero) plus the float Newton residual norm."""

    ubar: CoeffVec
    n: int
    residual_norm: Ivl

    def __post_init__(self):
        if self.ubar.basis != "Q" or self.ubar.parity != "even":
            raise ValueError("approximate solution must be even, Q basis")
        if self.ubar.dim != self.n + 1:
            raise ValueError("coefficient count must be n + 1")


@dataclass
class ProofBounds:
    Y: Ivl
    Z11: Ivl
    Z12: Ivl
    Z21: Ivl
    Z22: Ivl
    Z1: Ivl
    Z2: Ivl
    Z3: Ivl
    An_norm: Ivl


@dataclass
class RadiiResult:
    """Isolation of the contraction radii: delta_lo encloses the smallest
    positive root of Q, delta_hi the root of R (or a declared cap when R
    has none); success means a rigorous Q(delta) < 0, R(delta) < 0 was
    exhibited at delta = delta_lo.hi."""

    delta_lo: Ivl
    delta_hi: Ivl
    success: bool


def check_params(params: GPParams) -> bool:
    """True iff the residual polynomial vanishes exactly."""
    return (6 + 4 * params.c - params.kappa ** 2 == 0
            and 2 * params.d - params.kappa == 0)


# ---------------------------------------------------------------------------
# small converters
# ---------------------------------------------------------------------------


def _mr_of_ivl(x: Ivl) -> MR:
    return _ivl_to_mr([x])[0]


def _mr_of_frac(q: Fraction) -> MR:
    f = float(q)
    if Fraction(f) == q:
        return MR.exact(np.float64(f))
    return MR.from_lohi(np.float64(math.nextafter(f, -math.inf)),
                        np.float64(math.nextafter(f, math.inf)))


def _ivl_of_mr(x: MR, ctx: PrecisionContext) -> Ivl:
    return _float_pair_to_ivl(float(x.lo()), float(x.hi()), ctx)


def _nonneg_mr(x: MR) -> MR:
    """Clamp an enclosure of a quantity known to be >= 0."""
    return MR.from_lohi(np.maximum(x.lo(), 0.0), np.maximum(x.hi(), 0.0))


def _half_entries(v: CoeffVec, n: int) -> np.ndarray:
    ent = v.entries
    vals = []
    for i in range(0, n + 1, 2):
        x = ent[i] if i < len(ent) else 0.0
        vals.append(float(x.mid()) if isinstance(x, Ivl) else float(x))
    return np.array(vals)


# ---------------------------------------------------------------------------
# float64 Newton stage (non-rigorous; rigor enters in the bounds)
# ---------------------------------------------------------------------------


def _mid_recurrence(kappa: Fraction, m: int, length: int) -> np.ndarray:
    """Float midpoints of the recurrence coefficients a_1..a_length+1 for
    the rescaled weight e^{-(m/2)V}; index 0 is a placeholder 0."""
    params = PainleveParams(kappa, _CMINUS, _CPLUS, m)
    b, _ = forward_enclosure_cached(params, length + 2)
    return np.array([0.0] + [math.sqrt(float(b[k].mid()))
                             for k in range(1, length + 2)])


def forward_enclosure_cached(params: PainleveParams, n_max: int):
    """Disk-cached forward recursion, tight enough that the coefficient
    midpoints used by the float Newton stage match the exact problem to
    well below the Newton tolerance."""
    from freudcaps.painleve import forward_enclosure

    key = (str(params.kappa), params.m, n_max, "mid14")
    got = _cache.load("fwdmid", key)
    if got is not None:
        bits = got["bits"]
        ctx = PrecisionContext(bits)
        return [Ivl(lo, hi, ctx) for lo, hi in got["b"]], bits
    b, bits = forward_enclosure(params, n_max,
                                width_frac=Fraction(1, 10 ** 14))
    _cache.store("fwdmid", key, {"bits": bits,
                                 "b": [[x.lo, x.hi] for x in b]})
    return b, bits


def _float_rule(kappa: Fraction, m: int, N: int):
    """Non-rigorous Gauss rule (positive half) for e^{-(m/2)V}: nodes in
    the original variable and probability weights, by tridiagonal
    eigendecomposition in float64."""
    a_t = _mid_recurrence(kappa, m, N)
    w, v = eigh_tridiagonal(np.zeros(N), a_t[1:N], lapack_driver="stemr")
    s = (2.0 / m) ** 0.25
    pos = w > 1e-12
    return s * w[pos], (v[0, pos] ** 2)


def _float_vdm(a_base: np.ndarray, x: np.ndarray, W: np.ndarray,
               n: int, m: int) -> np.ndarray:
    """Folded node-evaluation matrix (2W_i)^(1/m) p_j(x_i), even columns
    j = 0, 2, ..., n.  Rows whose seed underflows are genuinely negligible:
    their true entries carry the same exponentially small prefactor wherever
    the integrands downstream are non-negligible."""
    with np.errstate(under="ignore"):
        seed = (2.0 * W) ** (1.0 / m)
        p_prev, p_cur = np.zeros_like(x), seed.copy()
        cols = []
        for j in range(n + 1):
            if j % 2 == 0:
                cols.append(p_cur.copy())
            aj = a_base[j] if j else 0.0
            p_prev, p_cur = p_cur, (x * p_cur - aj * p_prev) / a_base[j + 1]
    return np.stack(cols, axis=1)


def _solve_upper_bidiag(d: np.ndarray, s: np.ndarray, rhs: np.ndarray):
    """x with (diag(d) + superdiag(s)) x = rhs; rhs may be a matrix."""
    x = np.zeros_like(rhs, dtype=float)
    K = len(d)
    x[K - 1] = rhs[K - 1] / d[K - 1]
    for i in range(K - 2, -1, -1):
        x[i] = (rhs[i] - s[i] * x[i + 1]) / d[i]
    return x


def _solve_lower_bidiag(d: np.ndarray, s: np.ndarray, rhs: np.ndarray):
    """x with (diag(d) + subdiag(s)) x = rhs (transpose of the above)."""
    x = np.zeros_like(rhs, dtype=float)
    x[0] = rhs[0] / d[0]
    for i in range(1, len(d)):
        x[i] = (rhs[i] - s[i - 1] * x[i - 1]) / d[i]
    return x


class _NewtonSpace:
    """Float64 discretization shared by the seed builder and the solver."""

    def __init__(self, params: GPParams, n: int):
        if n % 2 or n < 4:
            raise ValueError("n must be even and at least 4")
        self.params, self.n = params, n
        kappa = params.kappa
        a2 = _mid_recurrence(kappa, 2, n + 4)
        idxs = _block_indices("even", n, True)
        alpha = np.array([0.0] + [k / a2[k] for k in range(1, n + 3)])
        beta = np.array([0.0] + [a2[k] * a2[k + 1] * a2[k + 2]
                                 for k in range(1, n + 1)])
        self.diag = np.array([1.0 if i == 0 else alpha[i] for i in idxs])
        self.sup = np.array([0.0 if i == 0 else beta[i] for i in idxs[:-1]])
        N4 = 2 * n + 4
        self.x, self.W = _float_rule(kappa, 4, N4)
        self.M = _float_vdm(a2, self.x, self.W, n, 4)
        ctx = PrecisionContext(256)
        Z2 = enclose_weighted_integral([1], kappa, 2, ctx)
        Z4 = enclose_weighted_integral([1], kappa, 4, ctx)
        self.rho4 = float((Z4 / Z2).mid())

    def residual(self, uq: np.ndarray):
        up = _solve_upper_bidiag(self.diag, self.sup, uq)
        t = self.M @ up
        fp = float(self.params.omega) * up
        fp[0] += up[0]
        fp -= self.rho4 * (self.M.T @ (t ** 3))
        return uq - _solve_lower_bidiag(self.diag, self.sup, fp), up, t

    def jacobian(self, t: np.ndarray):
        K = len(self.diag)
        G = self.rho4 * ((self.M * (t * t)[:, None]).T @ self.M)
        B = float(self.params.omega) * np.eye(K) - 3.0 * G
        B[0, 0] += 1.0
        C = _solve_lower_bidiag(self.diag, self.sup, B)
        C = _solve_lower_bidiag(self.diag, self.sup, C.T).T
        return np.eye(K) - C


def seed_vector(params: GPParams, n: int, kind: str) -> CoeffVec:
    """Q-basis seed profiles: 'bump' is the positive quasi-static profile
    sqrt(max(omega - W, 0)) that balances the well against the cubic term,
    'signed' a one-sign-change even profile; both are least-squares
    projections of the target e^{V/2}-weighted profile onto the modes."""
    sp = _NewtonSpace(params, n)
    x, W = sp.x, sp.W
    kap = float(params.kappa)
    with np.errstate(under="ignore", over="ignore"):
        logmag = 0.25 * np.log(np.maximum(2.0 * W, 1e-300)) \
            + 0.5 * (x ** 4 / 4.0 - kap * x ** 2 / 2.0)
        if kind == "bump":
            t2 = x * x
            g = t2 ** 3 / 4.0 - float(params.kappa) / 2.0 * t2 ** 2 \
                + float(params.c) * t2 + float(params.d - params.omega)
            prof = np.sqrt(np.maximum(-g, 0.0))
        elif kind == "signed":
            prof = 3.0 * (1.0 - x ** 2) * np.exp(-x ** 2 / 2.0)
        else:
            raise ValueError("seed kind must be 'bump' or 'signed'")
        t = np.where((W > 0) & (logmag < 600.0),
                     np.sign(prof) * np.exp(logmag + np.log(
                         np.maximum(np.abs(prof), 1e-290))), 0.0)
    up = np.linalg.lstsq(sp.M, t, rcond=None)[0]
    uq = sp.diag * up
    uq[:-1] += sp.sup * up[1:]
    return _pack_even(uq, n)


def _pack_even(half: np.ndarray, n: int) -> CoeffVec:
    ent = [0.0] * (n + 1)
    for k, i in enumerate(range(0, n + 1, 2)):
        ent[i] = float(half[k])
    return CoeffVec("Q", "even", ent)


def newton_solve(params: GPParams, n: int, seed: CoeffVec, *,
                 tol: float = 1e-12, max_iter: int = 60) -> ApproxSolution:
    """Damped Newton iteration on the even finite-mode block.

    The Jacobian is I - Pbar^{-T} (omega I + e0 e0^T - 3 G) Pbar^{-1} with
    G the discrete Gram matrix of the cubic term; the mean-mode rank-one
    term is carried explicitly in index 0."""
    if seed.basis != "Q" or seed.parity not in ("even",):
        raise ValueError("seed must be an even Q-basis vector")
    sp = _NewtonSpace(params, n)
    uq = _half_entries(seed, n)
    r, up, t = sp.residual(uq)
    rn = float(np.linalg.norm(r))
    for _ in range(max_iter):
        if rn < tol:
            break
        J = sp.jacobian(t)
        step = np.linalg.solve(J, r)
        lam = 1.0
        while lam > 1e-6:
            cand = uq - lam * step
            rc, upc, tc = sp.residual(cand)
            rcn = float(np.linalg.norm(rc))
            if rcn < rn * (1.0 - 0.25 * lam) or rcn < tol:
                uq, r, up, t, rn = cand, rc, upc, tc, rcn
                break
            lam *= 0.5
        else:
            raise ArithmeticError(
                f"Newton stagnation: residual {rn:.3e} not improving")
    if rn >= tol:
        raise ArithmeticError(f"Newton did not converge: residual {rn:.3e}")
    ctx = PrecisionContext(256)
    return ApproxSolution(_pack_even(uq, n), n,
                          _float_pair_to_ivl(0.0, rn, ctx))


def truncate_solution(sol: ApproxSolution, tol: float = 1e-12
                      ) -> tuple[ApproxSolution, int]:
    """Zero the trailing modes with relative size below tol; returns the
    truncated solution and the largest surviving mode index n_u (even).
    Truncation redefines the approximate solution; all certified bounds are
    computed for the truncated vector, so no rigor is lost."""
    uq = _half_entries(sol.ubar, sol.n)
    scale = float(np.max(np.abs(uq)))
    keep = np.nonzero(np.abs(uq) > tol * scale)[0]
    n_u = 2 * int(keep[-1]) if len(keep) else 0
    uq[np.abs(uq) <= tol * scale] = 0.0
    return ApproxSolution(_pack_even(uq, sol.n), sol.n,
                          sol.residual_norm), n_u


# ---------------------------------------------------------------------------
# certified workspace
# ---------------------------------------------------------------------------


@dataclass
class ProofConstants:
    """Everything the Y/Z bounds need: certified embedding constants, the
    two high-order quadrature rules' node-evaluation matrices in float64
    midpoint-radius form, and the dense inverse of the even basis-change
    block."""

    params: GPParams
    n: int
    n_u: int
    ctx: PrecisionContext
    coeffs: FreudCoeffs          # certified table (constants, positivity)
    coeffs_hp: FreudCoeffs       # tight-width prefix (matrix assembly)
    C_alpha: Ivl
    theta: Ivl
    C22: Ivl
    C_tail: Ivl
    C_P: Ivl
    flux: FluxConstants
    beta_n: Ivl
    M4: MR
    M6: MR
    Pinv: MR
    rho4: MR
    rho6: MR
    rule4_bits: int
    rule6_bits: int

    def tail_factor_mr(self) -> MR:
        """beta_n / (C_alpha sqrt(1 - theta^2)) as a float64 enclosure."""
        ctx = self.ctx
        den = self.C_alpha * (ctx.one() - self.theta * self.theta).sqrt()
        return _mr_of_ivl(self.beta_n / den)

    def n34_mr(self) -> MR:
        return _mr_of_ivl(self.ctx.ivl(self.n).ipow(3).root4())


def _base_prefix(kappa: Fraction, length: int, digits: int) -> FreudCoeffs:
    """Tight-width coefficient table for the base weight by the forward
    recursion (containment-rigorous on any finite prefix), disk-cached."""
    key = (str(kappa), length, digits)
    got = _cache.load("baseprefix", key)
    params = PainleveParams(kappa, _CMINUS, _CPLUS, 2)
    if got is not None:
        ctx = PrecisionContext(got["bits"])
        a = [ctx.zero()] + [Ivl(lo, hi, ctx) for lo, hi in got["a"]]
        length = len(a) - 3
        alpha = [ctx.zero()] + [ctx.ivl(k) / a[k] for k in range(1, length + 1)]
        beta = [ctx.zero()] + [a[k] * a[k + 1] * a[k + 2]
                               for k in range(1, length + 1)]
        return FreudCoeffs(params.kappa_ivl(ctx), length, a, alpha, beta, None)
    tc = _tilde_coeffs(params, length, start_bits=16384,
                       width_frac=Fraction(1, 10 ** digits))
    _cache.store("baseprefix", key,
                 {"bits": tc.ctx().bits,
                  "a": [[x.lo, x.hi] for x in tc.a[1:]]})
    return tc


def _vdm_mr(rule: QuadratureRule, coeffs: FreudCoeffs, n: int,
            use_cache: bool = True) -> MR:
    """Certified folded node-evaluation matrix (2W_i)^(1/m) p_j(s y_i) over
    the positive nodes, even columns j <= n, assembled row-wise in MPFR at
    the rule's working precision and rounded outward to float64.

    Raises if any entry enclosure is too wide to be meaningful: that signals
    insufficient working precision upstream, never a silent quality loss."""
    key = (rule.m, str(rule.kappa), rule.N_nodes, rule.bits, n,
           coeffs.ctx().bits)
    if use_cache:
        got = _cache.load("vdmmr", key)
        if got is not None:
            return MR(got["mid"], got["rad"])
    wctx = rule.ctx()
    a = [wctx.zero()] + [coeffs.a[j].round_to(wctx)
                         for j in range(1, n + 2)]
    inv_m = wctx.one() / wctx.ivl(rule.m)
    K = n // 2 + 1
    lo = np.empty((len(rule.nodes), K))
    hi = np.empty((len(rule.nodes), K))
    for i, (xi, w) in enumerate(zip(rule.nodes, rule.weights)):
        x = rule.s * xi
        seed = (((w + w).log()) * inv_m).exp()
        p_prev, p_cur = wctx.zero(), seed
        k = 0
        for j in range(n + 1):
            if j % 2 == 0:
                lo[i, k] = math.nextafter(float(p_cur.lo), -math.inf)
                hi[i, k] = math.nextafter(float(p_cur.hi), math.inf)
                k += 1
            p_prev, p_cur = p_cur, (x * p_cur - a[j] * p_prev) / a[j + 1]
    M = MR.from_lohi(lo, hi)
    if float(np.max(M.rad)) > 1e-6 + 1e-6 * float(np.max(np.abs(M.mid))):
        raise ArithmeticError(
            "node-evaluation enclosures too wide; working precision of the "
            "quadrature rule is insufficient for this block size")
    if use_cache:
        _cache.store("vdmmr", key, {"mid": M.mid, "rad": M.rad})
    return M


def _rule_sizes(n: int, n_u: int) -> tuple[int, int]:
    """Node counts making both rules exact for every integrand in the
    bounds: the widest are degree 2n + 2 n_u (cubic-term Gram under the
    m = 4 rule) and degree 2n + 4 n_u (per-mode tails under m = 6)."""
    N4 = n + n_u + 4
    N6 = n + 2 * n_u + 4
    return N4 + N4 % 2, N6 + N6 % 2


def proof_constants(params: GPParams, n: int, n_u: int, *, bits: int = 512,
                    work_bits4: int = 12288, work_bits6: int = 12288,
                    use_cache: bool = True) -> ProofConstants:
    """Assemble every certified ingredient of the proof at mode cutoff n
    for approximate solutions supported on modes <= n_u.

    The two quadrature-rule builds dominate the cost (tens of minutes to
    hours at the default working precisions) and are disk-cached."""
    if not check_params(params):
        raise ValueError("parameters do not cancel the residual polynomial")
    if n % 2 or n_u % 2 or n_u > n:
        raise ValueError("n and n_u must be even with n_u <= n")
    kappa = params.kappa
    ctx = PrecisionContext(bits)
    enc = certify(PainleveParams(kappa, _CMINUS, _CPLUS, 2), 9_000_000,
                  use_cache=use_cache)
    coeffs = coeffs_from_enclosure(enc, n + 8, ctx)
    C_alpha, theta = compactness_constants(coeffs, coeffs.source.N, _CPLUS)
    _, C22, C_tail = tail_constants(coeffs, n, C_alpha, theta, "even")
    C_P = poincare_enclosure(coeffs, n).upper
    flux = flux_bound(coeffs, n, _CMINUS, _CPLUS, theta, C_alpha, C_P=C_P)

    N4, N6 = _rule_sizes(n, n_u)
    rule4 = freud_gauss_rule(4, kappa, N4, work_bits=work_bits4,
                             use_cache=use_cache)
    rule6 = freud_gauss_rule(6, kappa, N6, work_bits=work_bits6,
                             use_cache=use_cache)
    digits = work_bits6 * 3 // 10 + 40
    coeffs_hp = _base_prefix(kappa, n + 4, digits)
    M4 = _vdm_mr(rule4, coeffs_hp, n, use_cache)
    M6 = _vdm_mr(rule6, coeffs_hp, n, use_cache)

    idxs = _block_indices("even", n, True)
    Pinv = _bidiag_inverse_mr(*_p_block(coeffs, idxs))
    Z2 = enclose_weighted_integral([1], kappa, 2, ctx)
    rho4 = _mr_of_ivl((rule4.Z / Z2.round_to(rule4.ctx())).round_to(ctx))
    rho6 = _mr_of_ivl((rule6.Z / Z2.round_to(rule6.ctx())).round_to(ctx))
    return ProofConstants(
        params=params, n=n, n_u=n_u, ctx=ctx, coeffs=coeffs,
        coeffs_hp=coeffs_hp, C_alpha=C_alpha, theta=theta, C22=C22,
        C_tail=C_tail, C_P=C_P, flux=flux, beta_n=coeffs.beta[n],
        M4=M4, M6=M6, Pinv=Pinv, rho4=rho4, rho6=rho6,
        rule4_bits=rule4.bits, rule6_bits=rule6.bits)


# ---------------------------------------------------------------------------
# certified bounds
# ---------------------------------------------------------------------------


def _check_support(sol: ApproxSolution, consts: ProofConstants) -> None:
    uq = _half_entries(sol.ubar, sol.n)
    if np.any(uq[consts.n_u // 2 + 1:] != 0.0):
        raise ValueError("solution support exceeds the workspace n_u")
    if sol.n != consts.n:
        raise ValueError("mode cutoff mismatch between solution and workspace")


def _uq_mr(sol: ApproxSolution, consts: ProofConstants) -> MR:
    return MR.exact(_half_entries(sol.ubar, sol.n))


def _gram_cubic(consts: ProofConstants, t4sq: MR) -> MR:
    """G with G_jk = <p_j, e^{-V} ubar^2 p_k> over the even block."""
    M4 = consts.M4
    return consts.rho4 * (M4.T @ (M4 * t4sq.reshape(-1, 1)))


def _jacobian_mr(consts: ProofConstants, G: MR) -> tuple[MR, MR]:
    """(DF_P, J): the linearized-nonlinearity matrix in the L2 basis and
    the finite-section Jacobian I - Pinv^T DF_P Pinv in the H1 basis."""
    K = consts.n // 2 + 1
    omega = _mr_of_frac(consts.params.omega)
    DF = -(MR.exact(np.float64(3.0)) * G)
    e0 = np.zeros((K, K))
    e0[0, 0] = 1.0
    DF = DF + MR.exact(e0) + omega * MR.exact(np.eye(K))
    J = MR.exact(np.eye(K)) - consts.Pinv.T @ (DF @ consts.Pinv)
    return DF, J


def build_An(sol: ApproxSolution, consts: ProofConstants) -> MR:
    """Approximate inverse of the finite-section Jacobian: float64 LU
    inverse of the midpoint matrix, promoted to an exact point enclosure
    (rigor enters through the Z11 bound, not through A_n itself)."""
    _check_support(sol, consts)
    up = consts.Pinv @ _uq_mr(sol, consts)
    t4 = consts.M4 @ up
    _, J = _jacobian_mr(consts, _gram_cubic(consts, t4.square()))
    return MR.exact(np.linalg.inv(J.mid))


def bound_Y(sol: ApproxSolution, An: MR, consts: ProofConstants) -> Ivl:
    """Certified defect bound: finite part ||A_n (uq - Pinv^T f_P)|| plus
    the tail of the cubic term beyond mode n, measured spectrally as the
    quadrature difference of ||e^{-V} ubar^3||^2 and its projection."""
    _check_support(sol, consts)
    ctx = consts.ctx
    uq = _uq_mr(sol, consts)
    up = consts.Pinv @ uq
    t4 = consts.M4 @ up
    gP = consts.rho4 * (consts.M4.T @ (t4.square() * t4))
    omega = _mr_of_frac(consts.params.omega)
    fp = omega * up - gP
    e0 = np.zeros(consts.n // 2 + 1)
    e0[0] = 1.0
    fp = fp + MR(e0 * up.mid[0], e0 * up.rad[0])
    main2 = (An @ (uq - consts.Pinv.T @ fp)).norm2sq()

    term1 = abs(consts.Pinv[:, -1].dot(fp)) * consts.tail_factor_mr()
    t6 = consts.M6 @ up
    u6sq = t6.square()
    norm6 = consts.rho6 * (u6sq * u6sq * u6sq).sum()
    defect = _nonneg_mr(norm6 - gP.norm2sq())
    term2 = _mr_of_ivl(consts.C22) * defect.sqrt()
    tail = term1 + term2
    n34 = consts.n34_mr()
    y2 = _nonneg_mr(main2 + (tail * tail) / (n34 * n34 * n34))
    return _ivl_of_mr(y2.sqrt(), ctx)


def bound_Z1(sol: ApproxSolution, An: MR, consts: ProofConstants
             ) -> tuple[Ivl, Ivl, Ivl, Ivl, Ivl]:
    """The four blocks of the first-order bound and their combined 2x2
    spectral norm: (Z11, Z12, Z21, Z22, Z1)."""
    _check_support(sol, consts)
    ctx = consts.ctx
    uq = _uq_mr(sol, consts)
    up = consts.Pinv @ uq
    t4 = consts.M4 @ up
    G = _gram_cubic(consts, t4.square())
    DF, J = _jacobian_mr(consts, G)
    K = consts.n // 2 + 1

    z11 = fastivl.norm_2_upper(MR.exact(np.eye(K)) - An @ J)
    Z11 = _float_pair_to_ivl(0.0, z11, ctx)

    tf = consts.tail_factor_mr()
    n34 = consts.n34_mr()
    lastcol = consts.Pinv[:, -1]
    three_c22 = MR.exact(np.float64(3.0)) * _mr_of_ivl(consts.C22)

    # row block: coupling of the last retained mode into the tail
    rowvec = DF.T @ lastcol
    t6 = consts.M6 @ up
    u6sq = t6.square()
    Mq = consts.M6 @ consts.Pinv
    rs = Mq.square().sum(axis=1)
    S1 = consts.rho6 * (u6sq.square() * rs).sum()
    GPi = G @ consts.Pinv
    defect21 = _nonneg_mr(S1 - GPi.square().sum())
    Z21mr = (tf * MR.from_lohi(0.0, rowvec.norm2_upper())
             + three_c22 * defect21.sqrt()) / n34
    Z21 = _ivl_of_mr(Z21mr, ctx)

    # column block: per-mode tails of the cubic coupling
    wfirst = consts.rho6 * (consts.M6.square()
                            * u6sq.square().reshape(-1, 1)).sum(axis=0)
    wvec = _nonneg_mr(wfirst - G.square().sum(axis=0)).sqrt()
    v1 = An @ (consts.Pinv.T @ (DF @ lastcol))
    v2 = An @ (consts.Pinv.T @ wvec)
    Z12mr = (tf * MR.from_lohi(0.0, v1.norm2_upper())
             + three_c22 * MR.from_lohi(0.0, v2.norm2_upper())) / n34
    Z12 = _ivl_of_mr(Z12mr, ctx)

    # uniform block: sup-norm of the profile via the product-form bound
    sup2 = consts.flux.Z * (consts.flux.c + ctx.one()) \
        * _ivl_of_mr(MR.from_lohi(0.0, up.norm2_upper()), ctx) \
        * _ivl_of_mr(MR.from_lohi(0.0, uq.norm2_upper()), ctx)
    n32 = ctx.ivl(consts.n).ipow(3).sqrt()
    omega_abs = abs(ctx.ivl(consts.params.omega))
    Z22 = consts.C_tail * consts.C_tail / n32 \
        * (ctx.ivl(3) * sup2 + omega_abs)

    def up_only(x: Ivl) -> Ivl:
        return Ivl(mpfr(0), x.hi, ctx)

    Z1 = l2_norm_upper_2x2(up_only(Z11), up_only(Z12),
                           up_only(Z21), up_only(Z22))
    return Z11, Z12, Z21, up_only(Z22), Ivl(mpfr(0), Z1.hi, ctx)


def bound_Z2_Z3(sol: ApproxSolution, An_norm: Ivl, consts: ProofConstants
                ) -> tuple[Ivl, Ivl]:
    """Curvature bounds of the cubic term: closed forms in the flux and
    Poincare constants, the operator norm ||A|| = max(||A_n||, 1), and (for
    the quadratic term) the L2 norm of the approximate solution."""
    _check_support(sol, consts)
    ctx = consts.ctx
    one = ctx.one()
    mcp = _ivl_max(one, consts.C_P)
    A = _ivl_max(An_norm, one)
    base = ctx.ivl(6) * consts.flux.Z * (consts.flux.c + one) * A
    up = consts.Pinv @ _uq_mr(sol, consts)
    ubar_l2 = _ivl_of_mr(MR.from_lohi(0.0, up.norm2_upper()), ctx)
    Z2 = base * (mcp.ipow(3)).sqrt() * ubar_l2
    Z3 = base * (mcp.ipow(5)).sqrt()
    return Ivl(mpfr(0), Z2.hi, ctx), Ivl(mpfr(0), Z3.hi, ctx)


def An_norm_bound(An: MR, ctx: PrecisionContext) -> Ivl:
    """Spectral-norm upper bound of the finite-section approximate inverse."""
    return _float_pair_to_ivl(0.0, fastivl.norm_2_upper(An), ctx)


# ---------------------------------------------------------------------------
# radii polynomials
# ---------------------------------------------------------------------------


def _q_poly(delta: Ivl, Y: Ivl, Z1: Ivl, Z2: Ivl, Z3: Ivl) -> Ivl:
    ctx = delta.ctx
    return Y - delta * (ctx.one() - Z1) + Z2 * delta * delta / ctx.ivl(2) \
        + Z3 * delta * delta * delta / ctx.ivl(6)


def _r_poly(delta: Ivl, Z1: Ivl, Z2: Ivl, Z3: Ivl) -> Ivl:
    ctx = delta.ctx
    return Z1 - ctx.one() + Z2 * delta + Z3 * delta * delta / ctx.ivl(2)


def radii(Y: Ivl, Z1: Ivl, Z2: Ivl, Z3: Ivl, *,
          cap: float = 1.0) -> RadiiResult:
    """Isolate the contraction radii of the cubic polynomial
    Q(delta) = Y - (1 - Z1) delta + Z2 delta^2/2 + Z3 delta^3/6 and of
    R = Q' + 1 - ... (the uniqueness polynomial).

    Q is convex on delta >= 0, so its smallest positive root delta_lo is
    isolated by float bisection followed by rigorous sign evaluation at the
    bracketing endpoints; delta_hi comes from the quadratic formula for R
    (or ``cap`` when R has no positive root).  Success requires rigorous
    Q < 0 and R < 0 at delta_lo.hi."""
    ctx = Y.ctx
    fail = RadiiResult(ctx.zero(), ctx.zero(), False)
    if not Z1.hi < 1:
        return fail
    y, z1, z2, z3 = (float(v.hi) for v in (Y, Z1, Z2, Z3))

    # upper radius: positive root of the convex quadratic R
    if z3 > 0:
        disc = z2 * z2 + 2.0 * z3 * (1.0 - z1)
        dhi = (-z2 + math.sqrt(disc)) / z3
    elif z2 > 0:
        dhi = (1.0 - z1) / z2
    else:
        dhi = cap
    dhi = min(dhi, cap)

    def qmid(d: float) -> float:
        return y - d * (1.0 - z1) + z2 * d * d / 2.0 + z3 * d ** 3 / 6.0

    if y == 0.0:
        a, b = 0.0, min(1e-30, dhi)
    else:
        a, b = 0.0, dhi
        if qmid(b) >= 0.0:
            return fail
        for _ in range(120):
            m = 0.5 * (a + b)
            if qmid(m) > 0.0:
                a = m
            else:
                b = m
    # rigorous bracket: Q(a) > 0 (or a = 0), Q(b) < 0; the expansion step
    # doubles so wide input enclosures still terminate quickly
    step = 1e-14
    for _ in range(80):
        qb = _q_poly(_float_pair_to_ivl(b, b, ctx), Y, Z1, Z2, Z3)
        if qb.hi < 0:
            break
        b = b * (1.0 + step) + 1e-300
        step *= 2.0
        if b >= dhi:
            return fail
    else:
        return fail
    step = 1e-14
    for _ in range(80):
        if a <= 0.0:
            a = 0.0
            break
        qa = _q_poly(_float_pair_to_ivl(a, a, ctx), Y, Z1, Z2, Z3)
        if qa.lo > 0:
            break
        a = a * (1.0 - step)
        step *= 2.0
    else:
        a = 0.0
    delta_lo = _float_pair_to_ivl(a, b, ctx)
    rb = _r_poly(_float_pair_to_ivl(b, b, ctx), Z1, Z2, Z3)
    success = bool(rb.hi < 0)
    lo_hi = min(dhi, b) if dhi > b else dhi
    delta_hi = _float_pair_to_ivl(lo_hi * (1.0 - 1e-9), dhi, ctx)
    return RadiiResult(delta_lo, delta_hi, success)


# ---------------------------------------------------------------------------
# positivity and H1(R) conversion
# ---------------------------------------------------------------------------


def _g_cubic(t: Ivl, params: GPParams) -> tuple[Ivl, Ivl, Ivl]:
    """(g, g', g'') at t for g(t) = t^3/4 - (kappa/2) t^2 + c t + d - omega,
    so that the effective well satisfies W(x) - omega = g(x^2)."""
    ctx = t.ctx
    kap = ctx.ivl(params.kappa)
    c = ctx.ivl(params.c)
    d = ctx.ivl(params.d)
    om = ctx.ivl(params.omega)
    g = t * t * t / ctx.ivl(4) - kap / ctx.ivl(2) * t * t + c * t + d - om
    gp = ctx.ivl(3) / ctx.ivl(4) * t * t - kap * t + c
    gpp = ctx.ivl(3) / ctx.ivl(2) * t - kap
    return g, gp, gpp


def _outer_radius(params: GPParams, ctx: PrecisionContext) -> Fraction:
    """Smallest quarter-integer r0 with W(x) - omega > 0 rigorously for all
    |x| >= r0: find t0 with g, g', g'' all positive (g''' = 3/2 > 0 makes g
    increasing and convex beyond t0) and take r0 = ceil(4 sqrt(t0))/4."""
    for k in range(1, 4000):
        t0 = Fraction(k, 4)
        g, gp, gpp = _g_cubic(ctx.ivl(t0), params)
        if g.lo > 0 and gp.lo > 0 and gpp.lo > 0:
            r0 = Fraction(math.ceil(4 * math.sqrt(float(t0))), 4)
            return r0
    raise ArithmeticError("no certified outer radius below the search cap")


def _profile_value(up, coeffs: FreudCoeffs, x: Ivl) -> Ivl:
    """e^{-V(x)/2} sum_j up_j p_j(x), rigorous at the context of x."""
    ctx = x.ctx
    kap = coeffs.kappa.round_to(ctx)
    x2 = x * x
    V = x2 * x2 / ctx.ivl(4) - kap * x2 / ctx.ivl(2)
    acc = ctx.zero()
    p_prev, p_cur = ctx.zero(), ctx.one()
    for j, cj in enumerate(up):
        if cj.lo != 0 or cj.hi != 0:
            acc = acc + cj.round_to(ctx) * p_cur
        if j + 1 < len(up):
            aj = coeffs.a[j].round_to(ctx) if j else ctx.zero()
            p_prev, p_cur = p_cur, \
                (x * p_cur - aj * p_prev) / coeffs.a[j + 1].round_to(ctx)
    return (-(V / ctx.ivl(2))).exp() * acc


def _profile_up(sol: ApproxSolution, coeffs: FreudCoeffs,
                ctx: PrecisionContext) -> list:
    """L2-basis coefficients of the approximate solution by the banded
    triangular solve, as intervals at the given context."""
    n = sol.n
    idxs = _block_indices("even", n, True)
    diag, sup = _p_block(coeffs, idxs)
    uq = [ctx.ivl(Fraction(float(v))) if not isinstance(v, Ivl) else v
          for v in (sol.ubar.entries[i] for i in idxs)]
    K = len(diag)
    half = [None] * K
    half[K - 1] = uq[K - 1] / diag[K - 1].round_to(ctx)
    for i in range(K - 2, -1, -1):
        half[i] = (uq[i] - sup[i].round_to(ctx) * half[i + 1]) \
            / diag[i].round_to(ctx)
    up = [ctx.zero()] * (n + 1)
    for k, i in enumerate(idxs):
        up[i] = half[k]
    return up


def _lipschitz_profile(up, coeffs: FreudCoeffs, linf_const: Ivl,
                       ctx: PrecisionContext) -> float:
    """Upper bound on sup |(e^{-V/2} ubar)'|: the derivative profile is
    e^{-V/2} w with w = ubar' - (V'/2) ubar, and the sup-norm embedding
    bounds it by linf_const * ||w||_{H1}; w is odd with zero mean, so its
    H1 norm is the weighted l2 norm of its banded image."""
    n = len(up) - 1
    if n + 5 > coeffs.length + 2:
        raise ValueError("coefficient table too short for the profile")
    a = [coeffs.a[j].round_to(ctx) if j else ctx.zero()
         for j in range(n + 6)]

    def jac_apply(v):
        out = [ctx.zero()] * len(v)
        for i in range(len(v)):
            s = ctx.zero()
            if i >= 1:
                s = s + a[i] * v[i - 1]
            if i + 1 < len(v):
                s = s + a[i + 1] * v[i + 1]
            out[i] = s
        return out

    ext = list(up) + [ctx.zero()] * 3
    xv = jac_apply(ext)
    x3 = jac_apply(jac_apply(xv))
    kap = coeffs.kappa.round_to(ctx)
    half = ctx.one() / ctx.ivl(2)
    # w in the L2 basis: derivative part minus the multiplication part
    wp = [ctx.zero()] * len(ext)
    for i in range(len(ext) - 3):
        wp[i] = coeffs.alpha[i + 1].round_to(ctx) * ext[i + 1] \
            + coeffs.beta[i + 1].round_to(ctx) * ext[i + 3]
    for i in range(len(ext)):
        wp[i] = wp[i] - (x3[i] - kap * xv[i]) * half
    # H1 norm: mean term (odd => exact 0 up to enclosure noise) plus the
    # banded image of the derivative
    s = wp[0] * wp[0]
    for i in range(1, len(ext)):
        t = coeffs.alpha[i].round_to(ctx) * wp[i]
        if i + 2 < len(ext):
            t = t + coeffs.beta[i].round_to(ctx) * wp[i + 2]
        s = s + t * t
    return float((linf_const * s.sqrt()).hi)


def positivity_check(sol: ApproxSolution, delta: Ivl,
                     flux_consts: FluxConstants, params: GPParams, *,
                     coeffs: FreudCoeffs, bits: int = 2048,
                     budget: int = 120000) -> bool:
    """True iff the physical profile of the genuine solution is certified
    strictly positive on the whole line.

    Outside a rational radius r0 the effective well exceeds the frequency,
    which forces positivity there; on [0, r0] an adaptive bisection
    certifies e^{-V/2} ubar > err + L h on each accepted box (err the
    sup-norm error of the solution ball, L a global derivative bound, h the
    box half-width).  Budget exhaustion or a certified negative value both
    yield False (inconclusive / disproved)."""
    if flux_consts.linf_const is None:
        raise ValueError("flux constants lack the sup-norm embedding")
    ctx = PrecisionContext(bits)
    err = float((flux_consts.linf_const * delta.round_to(
        flux_consts.linf_const.ctx)).hi)
    r0 = _outer_radius(params, ctx)
    up = _profile_up(sol, coeffs, ctx)
    last = max((j for j, v in enumerate(up) if v.lo != 0 or v.hi != 0),
               default=0)
    up = up[: last + 1]
    L = _lipschitz_profile(up, coeffs,
                           flux_consts.linf_const.round_to(ctx), ctx)
    stack = [(Fraction(0), Fraction(r0))]
    spent = 0
    while stack:
        a, b = stack.pop()
        spent += 1
        if spent > budget:
            return False
        mid = (a + b) / 2
        h = float(b - a) / 2.0
        val = _profile_value(up, coeffs, ctx.ivl(mid))
        if float(val.lo) - err - L * h > 0:
            continue
        if float(val.hi) < -err:
            return False        # the genuine solution dips negative here
        if h < 1e-14:
            return False        # cannot separate from zero: inconclusive
        stack.append((a, mid))
        stack.append((mid, b))
    return True


def h1R_error(delta: Ivl, flux_consts: FluxConstants) -> Ivl:
    """H1(R) error of the physical profile: the unweighted Sobolev norm of
    the difference between the genuine and approximate profiles is at most
    the embedding constant times the certified ball radius."""
    if flux_consts.h1R_const is None:
        raise ValueError("flux constants lack the H1(R) embedding")
    return flux_consts.h1R_const * delta.round_to(flux_consts.h1R_const.ctx)
