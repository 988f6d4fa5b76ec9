"""Extended-precision interval arithmetic and certified linear algebra.

The interval scalar :class:`Ivl` stores inf-sup endpoints as MPFR floats and
performs every operation twice, once under a round-toward-minus-infinity
context and once under a round-toward-plus-infinity context, so the result is
a guaranteed enclosure of the exact image set at the working precision.

On top of the scalar layer this module provides dense and banded interval
matrices, rigorous spectral-norm upper bounds, Gershgorin eigenvalue
enclosures and a certified matrix inverse (approximate inverse plus Neumann
remainder).  The rigorous enclosure of weighted integrals lives in
:mod:`freudcaps._quadint` and is re-exported here.
"""

from __future__ import annotations

from fractions import Fraction

import gmpy2
from gmpy2 import mpfr, mpq

__all__ = [
    "PrecisionContext",
    "Ivl",
    "DenseIvlMatrix",
    "BandedUpperIvl",
    "l2_norm_upper",
    "gershgorin_spectrum_bound",
    "certified_inverse",
    "enclose_weighted_integral",
]

_ONE = mpfr(1)


class PrecisionContext:
    """Paired directed-rounding MPFR contexts at a fixed mantissa precision."""

    __slots__ = ("bits", "down", "up", "near")

    def __init__(self, bits: int):
        if bits < 53:
            raise ValueError("precision must be at least 53 bits")
        self.bits = int(bits)
        self.down = gmpy2.context(precision=self.bits, round=gmpy2.RoundDown)
        self.up = gmpy2.context(precision=self.bits, round=gmpy2.RoundUp)
        self.near = gmpy2.context(precision=self.bits)

    # -- conversions ------------------------------------------------------

    def _to_mpq(self, value):
        if isinstance(value, (int, Fraction)):
            return mpq(value)
        if isinstance(value, mpq):
            return value
        if isinstance(value, mpfr):
            if not gmpy2.is_finite(value):
                raise ValueError("non-finite endpoint")
            return mpq(value)
        if isinstance(value, float):
            return mpq(Fraction(value))
        if isinstance(value, str):
            return mpq(Fraction(value))
        raise TypeError(f"cannot convert {type(value)!r} to an exact rational")

    def mpfr_down(self, value) -> mpfr:
        return self.down.mul(self._to_mpq(value), _ONE)

    def mpfr_up(self, value) -> mpfr:
        return self.up.mul(self._to_mpq(value), _ONE)

    def ivl(self, lo, hi=None) -> "Ivl":
        """Exact-input constructor with outward rounding."""
        if hi is None:
            hi = lo
        return Ivl(self.mpfr_down(lo), self.mpfr_up(hi), self)

    def ivl_point_mpfr(self, x: mpfr) -> "Ivl":
        """Wrap an mpfr as a degenerate interval (the mpfr value is exact).

        mpfr values are immutable, so the operand is stored as-is; note that
        gmpy2's unary +/- would silently round to the default context."""
        return Ivl(x, x, self)

    def zero(self) -> "Ivl":
        return Ivl(mpfr(0), mpfr(0), self)

    def one(self) -> "Ivl":
        return Ivl(mpfr(1), mpfr(1), self)

    def pi(self) -> "Ivl":
        return Ivl(self.down.const_pi(), self.up.const_pi(), self)

    def hull_many(self, items) -> "Ivl":
        it = iter(items)
        acc = next(it)
        for x in it:
            acc = acc.hull(x)
        return acc


class Ivl:
    """Inf-sup interval scalar with directed outward rounding."""

    __slots__ = ("lo", "hi", "ctx")

    def __init__(self, lo: mpfr, hi: mpfr, ctx: PrecisionContext):
        if not (gmpy2.is_finite(lo) and gmpy2.is_finite(hi)):
            raise ValueError("non-finite interval endpoint")
        if lo > hi:
            raise ValueError(f"inverted interval [{lo}, {hi}]")
        self.lo = lo
        self.hi = hi
        self.ctx = ctx

    # -- helpers ----------------------------------------------------------

    def _coerce(self, other) -> "Ivl":
        if isinstance(other, Ivl):
            return other
        return self.ctx.ivl(other)

    def __repr__(self):
        return f"Ivl[{self.lo}, {self.hi}]"

    # -- ring operations --------------------------------------------------

    def __add__(self, other):
        o = self._coerce(other)
        c = self.ctx
        return Ivl(c.down.add(self.lo, o.lo), c.up.add(self.hi, o.hi), c)

    __radd__ = __add__

    def __neg__(self):
        # gmpy2's unary minus rounds to the *default* context precision, so
        # negate through the interval's own directed contexts instead.
        c = self.ctx
        return Ivl(c.down.minus(self.hi), c.up.minus(self.lo), c)

    def __sub__(self, other):
        o = self._coerce(other)
        c = self.ctx
        return Ivl(c.down.sub(self.lo, o.hi), c.up.sub(self.hi, o.lo), c)

    def __rsub__(self, other):
        return self._coerce(other).__sub__(self)

    def __mul__(self, other):
        o = self._coerce(other)
        c = self.ctx
        a, b, d, e = self.lo, self.hi, o.lo, o.hi
        if a >= 0:
            if d >= 0:
                return Ivl(c.down.mul(a, d), c.up.mul(b, e), c)
            if e <= 0:
                return Ivl(c.down.mul(b, d), c.up.mul(a, e), c)
            return Ivl(c.down.mul(b, d), c.up.mul(b, e), c)
        if b <= 0:
            if d >= 0:
                return Ivl(c.down.mul(a, e), c.up.mul(b, d), c)
            if e <= 0:
                return Ivl(c.down.mul(b, e), c.up.mul(a, d), c)
            return Ivl(c.down.mul(a, e), c.up.mul(a, d), c)
        if d >= 0:
            return Ivl(c.down.mul(a, e), c.up.mul(b, e), c)
        if e <= 0:
            return Ivl(c.down.mul(b, d), c.up.mul(a, d), c)
        lo = min(c.down.mul(a, e), c.down.mul(b, d))
        hi = max(c.up.mul(a, d), c.up.mul(b, e))
        return Ivl(lo, hi, c)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        c = self.ctx
        a, b, d, e = self.lo, self.hi, o.lo, o.hi
        if d <= 0 <= e:
            raise ZeroDivisionError("division by an interval containing 0")
        if d > 0:
            if a >= 0:
                return Ivl(c.down.div(a, e), c.up.div(b, d), c)
            if b <= 0:
                return Ivl(c.down.div(a, d), c.up.div(b, e), c)
            return Ivl(c.down.div(a, d), c.up.div(b, d), c)
        # e < 0
        if a >= 0:
            return Ivl(c.down.div(b, e), c.up.div(a, d), c)
        if b <= 0:
            return Ivl(c.down.div(b, d), c.up.div(a, e), c)
        return Ivl(c.down.div(b, e), c.up.div(a, e), c)

    def __rtruediv__(self, other):
        return self._coerce(other).__truediv__(self)

    # -- elementary functions ---------------------------------------------

    def sqrt(self):
        if self.lo < 0:
            raise ValueError("sqrt of an interval touching negatives")
        c = self.ctx
        return Ivl(c.down.sqrt(self.lo), c.up.sqrt(self.hi), c)

    def exp(self):
        c = self.ctx
        return Ivl(c.down.exp(self.lo), c.up.exp(self.hi), c)

    def log(self):
        if self.lo <= 0:
            raise ValueError("log of an interval touching non-positives")
        c = self.ctx
        return Ivl(c.down.log(self.lo), c.up.log(self.hi), c)

    def ipow(self, n: int):
        """Integer power, exact monotonicity case analysis."""
        if not isinstance(n, int):
            raise TypeError("ipow exponent must be an integer")
        c = self.ctx
        if n == 0:
            return c.one()
        if n < 0:
            return c.one() / self.ipow(-n)
        if n % 2 == 1 or self.lo >= 0:
            return Ivl(c.down.pow(self.lo, n), c.up.pow(self.hi, n), c)
        if self.hi <= 0:
            return Ivl(c.down.pow(self.hi, n), c.up.pow(self.lo, n), c)
        hi = max(c.up.pow(self.lo, n), c.up.pow(self.hi, n))
        return Ivl(mpfr(0), hi, c)

    def __pow__(self, n):
        return self.ipow(n)

    def root4(self):
        """Fourth root (positive intervals)."""
        return self.sqrt().sqrt()

    # -- set predicates and lattice ops -----------------------------------

    def width(self) -> mpfr:
        return self.ctx.up.sub(self.hi, self.lo)

    def mid(self) -> mpfr:
        c = self.ctx.near
        return c.mul(c.add(self.lo, self.hi), mpfr("0.5"))

    def rad(self) -> mpfr:
        return self.ctx.up.mul(self.width(), mpfr("0.5"))

    def mag(self) -> mpfr:
        # built-in abs() would round to the default 53-bit context
        a = self.lo if self.lo >= 0 else self.ctx.up.minus(self.lo)
        b = self.hi if self.hi >= 0 else self.ctx.up.minus(self.hi)
        return max(a, b)

    def mig(self) -> mpfr:
        if self.lo > 0:
            return self.lo
        if self.hi < 0:
            return self.ctx.down.minus(self.hi)
        return mpfr(0)

    def __abs__(self):
        if self.lo >= 0:
            return self
        if self.hi <= 0:
            return -self
        return Ivl(mpfr(0), self.mag(), self.ctx)

    def hull(self, other) -> "Ivl":
        o = self._coerce(other)
        return Ivl(min(self.lo, o.lo), max(self.hi, o.hi), self.ctx)

    def intersect(self, other) -> "Ivl":
        o = self._coerce(other)
        lo, hi = max(self.lo, o.lo), min(self.hi, o.hi)
        if lo > hi:
            raise ValueError("empty intersection")
        return Ivl(lo, hi, self.ctx)

    def overlaps(self, other) -> bool:
        o = self._coerce(other)
        return self.lo <= o.hi and o.lo <= self.hi

    def contains(self, value) -> bool:
        if isinstance(value, Ivl):
            return self.lo <= value.lo and value.hi <= self.hi
        q = self.ctx._to_mpq(value)
        return self.lo <= q <= self.hi

    def is_subset(self, other) -> bool:
        o = self._coerce(other)
        return o.lo <= self.lo and self.hi <= o.hi

    def strictly_positive(self) -> bool:
        return self.lo > 0

    # certain (set-wise) comparisons
    def certainly_lt(self, other) -> bool:
        o = self._coerce(other)
        return self.hi < o.lo

    def certainly_le(self, other) -> bool:
        o = self._coerce(other)
        return self.hi <= o.lo

    def certainly_ge(self, other) -> bool:
        o = self._coerce(other)
        return self.lo >= o.hi

    def certainly_gt(self, other) -> bool:
        o = self._coerce(other)
        return self.lo > o.hi

    # -- widening ---------------------------------------------------------

    def inflate_rel(self, factor_num: int, factor_den: int) -> "Ivl":
        """Symmetric multiplicative widening about 0 by (num/den)."""
        c = self.ctx
        f = mpq(factor_num, factor_den)
        m = self.mag()
        pad = c.up.mul(m, c.up.mul(f, _ONE))
        return Ivl(c.down.sub(self.lo, pad), c.up.add(self.hi, pad), c)

    def next_out(self) -> "Ivl":
        return Ivl(gmpy2.next_below(self.lo), gmpy2.next_above(self.hi), self.ctx)

    def round_to(self, ctx: PrecisionContext) -> "Ivl":
        """Outward re-rounding into another precision context."""
        return Ivl(ctx.down.mul(self.lo, _ONE), ctx.up.mul(self.hi, _ONE), ctx)


# ---------------------------------------------------------------------------
# matrices
# ---------------------------------------------------------------------------


class DenseIvlMatrix:
    """Dense rectangular matrix of interval entries."""

    __slots__ = ("rows", "cols", "data", "ctx")

    def __init__(self, data, ctx: PrecisionContext):
        self.data = [list(row) for row in data]
        self.rows = len(self.data)
        self.cols = len(self.data[0]) if self.rows else 0
        for row in self.data:
            if len(row) != self.cols:
                raise ValueError("ragged matrix")
        self.ctx = ctx

    @classmethod
    def identity(cls, n: int, ctx: PrecisionContext) -> "DenseIvlMatrix":
        z, o = ctx.zero(), ctx.one()
        return cls([[o if i == j else z for j in range(n)] for i in range(n)], ctx)

    @classmethod
    def from_rational(cls, rows, ctx: PrecisionContext) -> "DenseIvlMatrix":
        return cls([[ctx.ivl(v) for v in row] for row in rows], ctx)

    def __getitem__(self, ij):
        i, j = ij
        return self.data[i][j]

    def transpose(self) -> "DenseIvlMatrix":
        return DenseIvlMatrix(
            [[self.data[i][j] for i in range(self.rows)] for j in range(self.cols)],
            self.ctx,
        )

    def __add__(self, other):
        return DenseIvlMatrix(
            [
                [self.data[i][j] + other.data[i][j] for j in range(self.cols)]
                for i in range(self.rows)
            ],
            self.ctx,
        )

    def __sub__(self, other):
        return DenseIvlMatrix(
            [
                [self.data[i][j] - other.data[i][j] for j in range(self.cols)]
                for i in range(self.rows)
            ],
            self.ctx,
        )

    def __matmul__(self, other):
        if self.cols != other.rows:
            raise ValueError("shape mismatch")
        z = self.ctx.zero()
        out = []
        bt = other.transpose().data
        for row in self.data:
            out_row = []
            for col in bt:
                acc = z
                for a, b in zip(row, col):
                    acc = acc + a * b
                out_row.append(acc)
            out.append(out_row)
        return DenseIvlMatrix(out, self.ctx)

    def matvec(self, vec):
        z = self.ctx.zero()
        out = []
        for row in self.data:
            acc = z
            for a, b in zip(row, vec):
                acc = acc + a * b
            out.append(acc)
        return out

    def norm_l1(self) -> Ivl:
        """Upper bound on the induced 1-norm (max magnitude column sum)."""
        c = self.ctx
        best = mpfr(0)
        for j in range(self.cols):
            s = mpfr(0)
            for i in range(self.rows):
                s = c.up.add(s, self.data[i][j].mag())
            best = max(best, s)
        return Ivl(mpfr(0), best, c)

    def norm_linf(self) -> Ivl:
        c = self.ctx
        best = mpfr(0)
        for row in self.data:
            s = mpfr(0)
            for x in row:
                s = c.up.add(s, x.mag())
            best = max(best, s)
        return Ivl(mpfr(0), best, c)

    def norm_frobenius_upper(self) -> mpfr:
        c = self.ctx
        s = mpfr(0)
        for row in self.data:
            for x in row:
                m = x.mag()
                s = c.up.add(s, c.up.mul(m, m))
        return c.up.sqrt(s)

    def mid_float(self):
        import numpy as np

        return np.array(
            [[float(x.mid()) for x in row] for row in self.data], dtype=float
        )


class BandedUpperIvl:
    """Upper-triangular banded matrix stored by superdiagonal offsets.

    ``diagonals[d]`` holds the entries ``A[i, i+d]`` for ``i = 0..dim-1-d``.
    Entries on offsets not present are exactly zero.
    """

    __slots__ = ("dim", "diagonals", "ctx")

    def __init__(self, dim: int, diagonals: dict, ctx: PrecisionContext):
        self.dim = dim
        self.diagonals = {int(d): list(v) for d, v in diagonals.items()}
        for d, v in self.diagonals.items():
            if d < 0:
                raise ValueError("only upper offsets allowed")
            if len(v) != dim - d:
                raise ValueError(f"offset {d} has wrong length")
        self.ctx = ctx

    @property
    def bandwidth(self) -> int:
        return max(self.diagonals) if self.diagonals else 0

    def entry(self, i: int, j: int) -> Ivl:
        d = j - i
        if d in self.diagonals and 0 <= i < self.dim - d:
            return self.diagonals[d][i]
        return self.ctx.zero()

    def to_dense(self, rows=None, cols=None) -> DenseIvlMatrix:
        rows = self.dim if rows is None else rows
        cols = self.dim if cols is None else cols
        return DenseIvlMatrix(
            [[self.entry(i, j) for j in range(cols)] for i in range(rows)], self.ctx
        )

    def transpose_matvec(self, vec):
        """(A^T v)_j = sum_i A[i, j] v_i."""
        out = [self.ctx.zero() for _ in range(self.dim)]
        for d, diag in self.diagonals.items():
            for i, a in enumerate(diag):
                out[i + d] = out[i + d] + a * vec[i]
        return out

    def matvec(self, vec):
        out = [self.ctx.zero() for _ in range(self.dim)]
        for d, diag in self.diagonals.items():
            for i, a in enumerate(diag):
                out[i] = out[i] + a * vec[i + d]
        return out

    def solve_upper(self, rhs):
        """Back-substitution solve A x = rhs; requires offset 0 present."""
        diag0 = self.diagonals.get(0)
        if diag0 is None:
            raise ValueError("no main diagonal")
        n = self.dim
        x = [None] * n
        offs = sorted(d for d in self.diagonals if d > 0)
        for i in range(n - 1, -1, -1):
            acc = rhs[i]
            for d in offs:
                j = i + d
                if j < n:
                    acc = acc - self.diagonals[d][i] * x[j]
            piv = diag0[i]
            if piv.lo <= 0 <= piv.hi:
                raise ZeroDivisionError(f"diagonal entry {i} contains 0")
            x[i] = acc / piv
        return x


# ---------------------------------------------------------------------------
# norm bounds, spectra, certified inverse
# ---------------------------------------------------------------------------


def l2_norm_upper(A: DenseIvlMatrix) -> Ivl:
    """Rigorous spectral-norm upper bound via sqrt(norm1 * norminf)."""
    c = A.ctx
    n1 = A.norm_l1().hi
    ninf = A.norm_linf().hi
    return Ivl(mpfr(0), c.up.sqrt(c.up.mul(n1, ninf)), c)


def l2_norm_upper_2x2(a: Ivl, b: Ivl, c_: Ivl, d: Ivl) -> Ivl:
    """Exact spectral norm of [[a, b], [c_, d]] (largest singular value).

    sigma_max^2 = (t + sqrt(t^2 - 4 det^2)) / 2 with t = a^2+b^2+c^2+d^2 and
    det = ad - bc, evaluated in interval arithmetic.
    """
    ctx = a.ctx
    t = a * a + b * b + c_ * c_ + d * d
    det = a * d - b * c_
    disc = t * t - ctx.ivl(4) * det * det
    if disc.lo < 0:
        disc = Ivl(mpfr(0), max(disc.hi, mpfr(0)), ctx)
    s2 = (t + disc.sqrt()) / ctx.ivl(2)
    return s2.sqrt()


def gershgorin_spectrum_bound(A: DenseIvlMatrix) -> Ivl:
    """Interval containing every eigenvalue of every real matrix in A."""
    if A.rows != A.cols:
        raise ValueError("square matrix required")
    c = A.ctx
    lo, hi = None, None
    for i in range(A.rows):
        r = mpfr(0)
        for j in range(A.cols):
            if j != i:
                r = c.up.add(r, A.data[i][j].mag())
        d = A.data[i][i]
        dlo = c.down.sub(d.lo, r)
        dhi = c.up.add(d.hi, r)
        lo = dlo if lo is None else min(lo, dlo)
        hi = dhi if hi is None else max(hi, dhi)
    return Ivl(lo, hi, c)


def certified_inverse(A: DenseIvlMatrix) -> DenseIvlMatrix:
    """Enclosure of A^{-1} via approximate inverse + Neumann certificate.

    Uses a floating approximate inverse Y of mid(A); with R = I - Y A and
    r = ||R||_inf < 1 rigorously, A^{-1} = (I - R)^{-1} Y and the column-wise
    entrywise remainder |A^{-1} - Y|_{ij} <= r/(1-r) * max_k |Y_{kj}|.
    """
    import numpy as np

    if A.rows != A.cols:
        raise ValueError("square matrix required")
    ctx = A.ctx
    n = A.rows
    Ymid = np.linalg.inv(A.mid_float())
    Y = DenseIvlMatrix.from_rational(
        [[Fraction(float(v)) for v in row] for row in Ymid], ctx
    )
    R = DenseIvlMatrix.identity(n, ctx) - (Y @ A)
    r = R.norm_linf().hi
    if not r < 1:
        raise ArithmeticError("not certifiably invertible at this precision")
    s = ctx.up.div(r, ctx.down.sub(mpfr(1), r))
    col_mag = [
        max(Y.data[k][j].mag() for k in range(n)) for j in range(n)
    ]
    out = []
    for i in range(n):
        row = []
        for j in range(n):
            pad = ctx.up.mul(s, col_mag[j])
            y = Y.data[i][j]
            row.append(Ivl(ctx.down.sub(y.lo, pad), ctx.up.add(y.hi, pad), ctx))
        out.append(row)
    return DenseIvlMatrix(out, ctx)


def vec_norm2_upper(vec) -> Ivl:
    """Upper bound of the Euclidean norm of an interval vector."""
    ctx = vec[0].ctx
    s = mpfr(0)
    for x in vec:
        m = x.mag()
        s = ctx.up.add(s, ctx.up.mul(m, m))
    return Ivl(mpfr(0), ctx.up.sqrt(s), ctx)


def vec_norm2(vec) -> Ivl:
    """Two-sided enclosure of the Euclidean norm of an interval vector."""
    ctx = vec[0].ctx
    hi = mpfr(0)
    lo = mpfr(0)
    for x in vec:
        m, g = x.mag(), x.mig()
        hi = ctx.up.add(hi, ctx.up.mul(m, m))
        lo = ctx.down.add(lo, ctx.down.mul(g, g))
    return Ivl(ctx.down.sqrt(lo), ctx.up.sqrt(hi), ctx)


def decimal_directed(x: mpfr, digits: int, direction: str) -> str:
    """Decimal scientific string rounded toward the requested direction.

    The printed value is an exact decimal; "down" never exceeds x and "up"
    is never below x, so round-tripping keeps enclosures valid.
    """
    if direction not in ("down", "up"):
        raise ValueError("direction must be 'down' or 'up'")
    if x == 0:
        return "0.0e+00"
    f = Fraction(int(x.as_integer_ratio()[0]), int(x.as_integer_ratio()[1]))
    neg = f < 0
    a = -f if neg else f
    # exponent e with 10^e <= a < 10^(e+1)
    e = len(str(a.numerator)) - len(str(a.denominator))
    while 10 ** e > a:
        e -= 1
    while 10 ** (e + 1) <= a:
        e += 1
    scaled = a * Fraction(10) ** (digits - 1 - e)
    n, d = scaled.numerator, scaled.denominator
    want_floor = (direction == "down") != neg
    m = n // d if want_floor else -((-n) // d)
    if m >= 10 ** digits:  # rounding up crossed a power of ten
        m //= 10
        e += 1
    s = str(m).rjust(digits, "0")
    body = f"{s[0]}.{s[1:]}" if digits > 1 else s
    return f"{'-' if neg else ''}{body}e{e:+03d}"


def ivl_to_decimal(x: "Ivl", digits: int = 40) -> tuple[str, str]:
    """Outward decimal (lo, hi) strings for an interval."""
    return (decimal_directed(x.lo, digits, "down"),
            decimal_directed(x.hi, digits, "up"))


def ivl_from_decimal(lo: str, hi: str, ctx: PrecisionContext) -> "Ivl":
    """Exact-input reconstruction of an interval from decimal strings."""
    return Ivl(ctx.mpfr_down(Fraction(lo)), ctx.mpfr_up(Fraction(hi)), ctx)


from freudcaps._quadint import enclose_weighted_integral  # noqa: E402
