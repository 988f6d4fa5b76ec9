"""Recurrence coefficients of the quartic-weight orthonormal polynomials and
the banded operator algebra built from them.

From a certified enclosure of the positive recurrence solution b_n this module
produces a_n = sqrt(b_n), the derivative coefficients alpha_n = n/a_n and
beta_n = a_n a_{n+1} a_{n+2}, the banded differentiation matrix D
(p_n' = alpha_n p_{n-1} + a_n a_{n-1} a_{n-2} p_{n-3}), the change-of-basis
matrix P between the weighted L2 and H1 orthonormal bases, triangular-solve
basis conversion, and a symbolic generator of the analogous recurrence
relation for a general even polynomial weight.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from freudcaps.ivlmath import (
    BandedUpperIvl,
    Ivl,
    PrecisionContext,
    decimal_directed,
    ivl_from_decimal,
)
from freudcaps.painleve import BnEnclosure, _env

__all__ = [
    "FreudCoeffs",
    "CoeffVec",
    "GeneralRecurrence",
    "coeffs_from_enclosure",
    "eval_pn",
    "build_D",
    "build_P",
    "parity_submatrix",
    "q_to_p",
    "derive_general_recurrence",
    "write_coeff_file",
    "read_coeff_file",
]


@dataclass
class FreudCoeffs:
    """Interval recurrence data a_n, alpha_n, beta_n for n = 1..length.

    Lists are indexed by n with a 0 placeholder at index 0 (a_0 = 0).  The
    internal vector ``a`` extends to length+2 so that beta_length is formed
    from certified values.
    """

    kappa: Ivl
    length: int
    a: list
    alpha: list
    beta: list
    source: BnEnclosure

    def ctx(self) -> PrecisionContext:
        return self.kappa.ctx


def coeffs_from_enclosure(enc: BnEnclosure, length: int,
                          ctx: PrecisionContext | None = None) -> FreudCoeffs:
    """Certified coefficient vectors from the recurrence enclosure.

    Requires length <= N2 - 2 (beta_length uses b up to length+2) and
    re-checks the envelope containment b_n in [c^- sqrt(n/3), c^+ sqrt(n/3)]
    for every used index n >= N, which underwrites the growth bounds on
    alpha_n and beta_n/alpha_n used downstream.
    """
    if length > enc.N2 - 2:
        raise ValueError("length exceeds the certified range (need <= N2 - 2)")
    ctx = ctx or enc.ctx()
    b = [enc.b[n].round_to(ctx) if n else ctx.zero() for n in range(length + 3)]
    for n in range(enc.N, length + 3):
        lo_env = _env(enc.params.c_minus, n, ctx)
        hi_env = _env(enc.params.c_plus, n, ctx)
        if not (b[n].lo >= lo_env.hi and b[n].hi <= hi_env.lo):
            raise ArithmeticError(f"envelope containment fails at index {n}")
    a = [ctx.zero()] + [b[n].sqrt() for n in range(1, length + 3)]
    alpha = [ctx.zero()] + [ctx.ivl(n) / a[n] for n in range(1, length + 1)]
    beta = [ctx.zero()] + [a[n] * a[n + 1] * a[n + 2] for n in range(1, length + 1)]
    kappa = ctx.ivl(enc.params.kappa)
    return FreudCoeffs(kappa, length, a, alpha, beta, enc)


def eval_pn(coeffs: FreudCoeffs, n: int, x: Ivl) -> Ivl:
    """Enclosure of p_n(x) by the three-term recurrence
    x p_k = a_{k+1} p_{k+1} + a_k p_{k-1} from p_0 = 1."""
    if n >= coeffs.length:
        raise ValueError("n beyond the stored coefficient range")
    ctx = x.ctx
    p_prev = ctx.zero()
    p_cur = ctx.one()
    for k in range(n):
        a_k = coeffs.a[k].round_to(ctx) if k else ctx.zero()
        a_k1 = coeffs.a[k + 1].round_to(ctx)
        p_next = (x * p_cur - a_k * p_prev) / a_k1
        p_prev, p_cur = p_cur, p_next
    return p_cur


def build_D(coeffs: FreudCoeffs, dim: int) -> BandedUpperIvl:
    """Differentiation matrix D[m, n] = <p_m, p_n'>: two superdiagonals,
    D[i, i+1] = alpha_{i+1} and D[i, i+3] = beta_{i+1}."""
    if dim > coeffs.length - 2:
        raise ValueError("dim exceeds the stored coefficient range")
    ctx = coeffs.ctx()
    d1 = [coeffs.alpha[i + 1] for i in range(dim - 1)]
    d3 = [coeffs.beta[i + 1] for i in range(dim - 3)]
    return BandedUpperIvl(dim, {1: d1, 3: d3}, ctx)


def build_P(coeffs: FreudCoeffs, dim: int) -> BandedUpperIvl:
    """Change-of-basis matrix from the H1 basis to the L2 basis:
    P[0,0] = 1; P[i,i] = alpha_i and P[i,i+2] = beta_i for i >= 1."""
    if dim > coeffs.length - 2:
        raise ValueError("dim exceeds the stored coefficient range")
    ctx = coeffs.ctx()
    d0 = [ctx.one()] + [coeffs.alpha[i] for i in range(1, dim)]
    d2 = [ctx.zero()] + [coeffs.beta[i] for i in range(1, dim - 2)]
    return BandedUpperIvl(dim, {0: d0, 2: d2}, ctx)


def parity_submatrix(B: BandedUpperIvl, row_parity: int,
                     col_parity: int) -> BandedUpperIvl:
    """Restriction of a banded matrix to rows i = row_parity (mod 2) and
    columns j = col_parity (mod 2), reindexed by half-indices.

    Every stored offset must connect the two parities (offset = col_parity -
    row_parity mod 2); other offsets would be dropped silently, so they are
    rejected.
    """
    shift = (col_parity - row_parity) % 2
    for d in B.diagonals:
        if d % 2 != shift:
            raise ValueError(f"offset {d} does not map parity "
                             f"{row_parity} rows to parity {col_parity} columns")
    rows = [i for i in range(B.dim) if i % 2 == row_parity]
    cols = [j for j in range(B.dim) if j % 2 == col_parity]
    dim = min(len(rows), len(cols))
    diagonals = {}
    for d in B.diagonals:
        nd = (d - (col_parity - row_parity)) // 2
        if nd < 0:
            raise ValueError("restriction is not upper triangular")
        vals = []
        for r in range(dim - nd):
            i = rows[r]
            j = cols[r + nd]
            vals.append(B.entry(i, j))
        diagonals[nd] = vals
    return BandedUpperIvl(dim, diagonals, B.ctx)


@dataclass
class CoeffVec:
    """Coefficient vector tagged with its orthonormal basis and parity."""

    basis: str              # "P" (weighted L2 basis) or "Q" (H1 basis)
    parity: str             # "even" | "odd" | "mixed"
    entries: list
    dim: int = 0

    def __post_init__(self):
        if self.basis not in ("P", "Q"):
            raise ValueError("basis must be 'P' or 'Q'")
        if self.parity not in ("even", "odd", "mixed"):
            raise ValueError("bad parity tag")
        self.dim = len(self.entries)
        if self.parity in ("even", "odd"):
            bad = 1 if self.parity == "even" else 0
            for i in range(bad, self.dim, 2):
                x = self.entries[i]
                nz = (x.lo != 0 or x.hi != 0) if isinstance(x, Ivl) else x != 0
                if nz:
                    raise ValueError(
                        f"{self.parity} vector has a nonzero entry at index {i}")


def q_to_p(coeffs: FreudCoeffs, v: CoeffVec) -> CoeffVec:
    """Basis conversion Q -> P by the banded triangular solve P x = v."""
    if v.basis != "Q":
        raise ValueError("input must be in the Q basis")
    P = build_P(coeffs, v.dim)
    x = P.solve_upper(v.entries)
    return CoeffVec("P", v.parity, x)


@dataclass
class GeneralRecurrence:
    """Recurrence n/b_n = sum_j v_j R_j(b_{n-j}, ..., b_{n+j}) for the weight
    exp(-V) with V = sum_{j=1..k} c_j x^{2j}."""

    k: int
    c: list                 # c_1..c_k as Fractions
    v: list = field(default_factory=list)   # v_j = 2(j+1) c_{j+1}, j = 0..k-1
    rhs_terms: list = field(default_factory=list)  # sympy R_j in x_{-j}..x_j

    def residual(self, b, n, ctx: PrecisionContext) -> Ivl:
        """Interval evaluation of n/b_n - sum_j v_j R_j at index n."""
        import sympy

        lhs = ctx.ivl(n) / b[n]
        acc = ctx.zero()
        for j, (vj, Rj) in enumerate(zip(self.v, self.rhs_terms)):
            subs = {}
            for i in range(-j, j + 1):
                subs[sympy.Symbol(f"x_{i}")] = b[n + i]
            term = _eval_sym(Rj, subs, ctx)
            acc = acc + ctx.ivl(vj) * term
        return lhs - acc


def _eval_sym(expr, subs, ctx: PrecisionContext) -> Ivl:
    """Evaluate an integer-coefficient polynomial expression on intervals."""
    import sympy

    poly = sympy.Poly(expr, *sorted(subs, key=str))
    gens = poly.gens
    acc = ctx.zero()
    for monom, coeff in poly.terms():
        term = ctx.ivl(int(coeff))
        for g, e in zip(gens, monom):
            for _ in range(e):
                term = term * subs[g]
        acc = acc + term
    return acc


def derive_general_recurrence(V_coeffs) -> GeneralRecurrence:
    """Symbolic recurrence for V = sum_{j=1..k} c_j x^{2j}.

    Writes V'(x) = sum_{j>=0} v_j x^{2j+1} with v_j = 2(j+1) c_{j+1} and
    derives R_j = <x^{2j+1} p_n, p_{n-1}> / a_n as a homogeneous degree-j
    polynomial with positive integer coefficients in x_i = b_{n+i},
    |i| <= j, by exact walk-counting on the Jacobi operator.
    """
    import sympy

    c = [Fraction(x) for x in V_coeffs]
    k = len(c)
    if k == 0 or c[-1] <= 0:
        raise ValueError("even polynomial with positive leading coefficient required")
    # the x^{2j+1} term of V' comes from c_{j+1} x^{2(j+1)}
    v = [Fraction(2 * (j + 1)) * c[j] for j in range(k)]
    rhs = []
    for j in range(k):
        rhs.append(_walk_polynomial(j))
    for j, Rj in enumerate(rhs):
        poly = sympy.Poly(Rj, *[sympy.Symbol(f"x_{i}") for i in range(-j, j + 1)])
        for monom, coeff in poly.terms():
            if sum(monom) != j or int(coeff) <= 0:
                raise AssertionError("recurrence term violates its invariants")
    return GeneralRecurrence(k, c, v, rhs)


def _walk_polynomial(j: int):
    """R_j as a polynomial in x_i = b_{n+i} via signed walks of the Jacobi
    matrix: <x^{2j+1} p_n, p_{n-1}> is a sum over 2j+1-step nearest-neighbor
    walks from n to n-1 with weight prod a over traversed edges; dividing by
    a_n leaves even powers of every a, i.e. a polynomial in the b's."""
    import sympy

    steps = 2 * j + 1
    # state: position offset -> polynomial in edge-count symbols
    # track edge traversal counts directly: monomial over edges (k-1, k) ~ a_{n+k}
    state = {0: {(): 1}}
    for _ in range(steps):
        new: dict = {}
        for d, monos in state.items():
            for mono, cnt in monos.items():
                for nd, edge in ((d + 1, d + 1), (d - 1, d)):
                    key = tuple(sorted(mono + (edge,)))
                    tgt = new.setdefault(nd, {})
                    tgt[key] = tgt.get(key, 0) + cnt
        state = new
    out = sympy.Integer(0)
    for mono, cnt in state.get(-1, {}).items():
        counts: dict = {}
        for e in mono:
            counts[e] = counts.get(e, 0) + 1
        counts[0] = counts.get(0, 0) - 1   # divide by a_n
        term = sympy.Integer(cnt)
        for e, p in counts.items():
            if p % 2:
                raise AssertionError("odd edge power after division")
            if p:
                term *= sympy.Symbol(f"x_{e}") ** (p // 2)
        out += term
    return sympy.expand(out)


# ---------------------------------------------------------------------------
# coefficient file format: lines "n lo hi" in decimal scientific notation
# ---------------------------------------------------------------------------


def write_coeff_file(path, entries, digits: int = 40) -> None:
    """Write interval entries as outward-rounded decimal records."""
    with open(path, "w") as f:
        for n, x in enumerate(entries):
            lo = decimal_directed(x.lo, digits, "down")
            hi = decimal_directed(x.hi, digits, "up")
            f.write(f"{n} {lo} {hi}\n")


def read_coeff_file(path, ctx: PrecisionContext) -> list:
    """Read a coefficient file back as a list of intervals."""
    out = []
    with open(path) as f:
        for line in f:
            parts = line.split()
            if not parts:
                continue
            n, lo, hi = int(parts[0]), parts[1], parts[2]
            if n != len(out):
                raise ValueError("non-contiguous coefficient records")
            out.append(ivl_from_decimal(lo, hi, ctx))
    return out
