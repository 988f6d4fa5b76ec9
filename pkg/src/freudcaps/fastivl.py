"""Rigorous midpoint-radius float64 interval arrays on numpy.

Every elementwise operation computes midpoints in round-to-nearest and grows
the radius by a bound on the worst-case rounding error: u*|mid| + slack with
u = 2^-53, inflated by (1 + 2^-48) to absorb the rounding of the radius
computation itself, plus an absolute underflow slack.  Matrix products use
the classical dot-product bound |fl(A@B) - A@B| <= gamma_{k+2} |A||B| with
gamma_k = k*u/(1-k*u), which is valid for any summation order and for FMA
contraction (both have error at most the recursive-summation bound; the BLAS
in use performs no Strassen-type algebraic rearrangement).

This engine is used for large certified matrix reductions where entrywise
MPFR intervals would be orders of magnitude too slow; extended precision
enters upstream (MPFR solves and downconversion with outward radii).
"""

from __future__ import annotations

import numpy as np

U = 2.0 ** -53
INFL = 1.0 + 2.0 ** -48
TINY = 2.0 ** -970  # per-operation underflow slack


class MR:
    """Midpoint-radius enclosure of a real scalar/vector/matrix."""

    __slots__ = ("mid", "rad")

    def __init__(self, mid, rad=None):
        self.mid = np.asarray(mid, dtype=np.float64)
        if rad is None:
            rad = np.zeros_like(self.mid)
        self.rad = np.asarray(rad, dtype=np.float64)
        if self.rad.shape != self.mid.shape:
            self.rad = np.broadcast_to(rad, self.mid.shape).astype(np.float64)
        if not (np.all(np.isfinite(self.mid)) and np.all(self.rad >= 0)):
            raise ValueError("non-finite midpoint or negative radius")

    # -- constructors -----------------------------------------------------

    @classmethod
    def exact(cls, mid):
        return cls(mid)

    @classmethod
    def from_lohi(cls, lo, hi):
        lo = np.asarray(lo, dtype=np.float64)
        hi = np.asarray(hi, dtype=np.float64)
        mid = 0.5 * (lo + hi)
        rad = (np.maximum(mid - lo, hi - mid) + U * np.abs(mid)) * INFL + TINY
        return cls(mid, rad)

    @property
    def shape(self):
        return self.mid.shape

    def __repr__(self):
        return f"MR(mid={self.mid!r}, rad={self.rad!r})"

    def __getitem__(self, idx):
        return MR(self.mid[idx], self.rad[idx])

    @property
    def T(self):
        return MR(self.mid.T, self.rad.T)

    def reshape(self, *shape):
        return MR(self.mid.reshape(*shape), self.rad.reshape(*shape))

    def lo(self):
        return (self.mid - self.rad) * np.where(self.mid - self.rad >= 0, 1.0 - 4 * U, 1.0 + 4 * U) - TINY

    def hi(self):
        return (self.mid + self.rad) * np.where(self.mid + self.rad >= 0, 1.0 + 4 * U, 1.0 - 4 * U) + TINY

    def mag(self):
        return (np.abs(self.mid) + self.rad) * INFL + TINY

    def mig(self):
        m = np.abs(self.mid) * (1.0 - 4 * U) - self.rad * INFL - TINY
        return np.maximum(m, 0.0)

    # -- elementwise arithmetic -------------------------------------------

    def _co(self, other):
        if isinstance(other, MR):
            return other
        return MR.exact(other)

    def __add__(self, other):
        o = self._co(other)
        mid = self.mid + o.mid
        rad = (self.rad + o.rad + U * np.abs(mid)) * INFL + TINY
        return MR(mid, rad)

    __radd__ = __add__

    def __neg__(self):
        return MR(-self.mid, self.rad)

    def __sub__(self, other):
        o = self._co(other)
        mid = self.mid - o.mid
        rad = (self.rad + o.rad + U * np.abs(mid)) * INFL + TINY
        return MR(mid, rad)

    def __rsub__(self, other):
        return self._co(other).__sub__(self)

    def __mul__(self, other):
        o = self._co(other)
        mid = self.mid * o.mid
        rad = (
            self.rad * (np.abs(o.mid) + o.rad)
            + np.abs(self.mid) * o.rad
            + U * np.abs(mid)
        ) * INFL + TINY
        return MR(mid, rad)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._co(other)
        den_mig = (np.abs(o.mid) - o.rad) * (1.0 - 4 * U) - TINY
        if not np.all(den_mig > 0):
            raise ZeroDivisionError("division by an enclosure touching 0")
        mid = self.mid / o.mid
        rad = ((self.rad + np.abs(mid) * o.rad) / den_mig + U * np.abs(mid)) * INFL + TINY
        return MR(mid, rad)

    def __rtruediv__(self, other):
        return self._co(other).__truediv__(self)

    def sqrt(self):
        lo = np.sqrt(np.maximum(self.mid - self.rad, 0.0)) * (1.0 - 2 * U)
        hi = np.sqrt(self.mid + self.rad) * (1.0 + 2 * U) + TINY
        return MR.from_lohi(lo, hi)

    def __abs__(self):
        lo = np.maximum(np.abs(self.mid) - self.rad, 0.0)
        hi = np.abs(self.mid) + self.rad
        return MR.from_lohi(lo * (1.0 - 2 * U), hi * (1.0 + 2 * U) + TINY)

    def square(self):
        return self * self

    def sum(self, axis=None):
        k = self.mid.size if axis is None else self.mid.shape[axis]
        g = _gamma(k + 2)
        mid = np.sum(self.mid, axis=axis)
        rad = (np.sum(self.rad, axis=axis) + g * np.sum(np.abs(self.mid), axis=axis)
               + U * np.abs(mid)) * INFL + k * TINY
        return MR(mid, rad)

    # -- linear algebra ---------------------------------------------------

    def __matmul__(self, other):
        o = self._co(other)
        k = self.mid.shape[-1]
        g = _gamma(k + 2)
        am, bm = np.abs(self.mid), np.abs(o.mid)
        mid = self.mid @ o.mid
        rad = (
            self.rad @ (bm + o.rad)
            + am @ o.rad
            + g * (am @ bm)
        ) * INFL + (k + 1) * TINY
        return MR(mid, rad)

    def dot(self, other):
        a = self.reshape(1, -1)
        b = self._co(other).reshape(-1, 1)
        r = a @ b
        return MR(r.mid.reshape(()), r.rad.reshape(()))

    def norm2sq(self):
        """Enclosure of the squared Euclidean norm of a vector."""
        k = self.mid.size
        g = _gamma(k + 2)
        m2 = self.mid * self.mid
        mid = float(np.sum(m2))
        hi = (float(np.sum((np.abs(self.mid) + self.rad) ** 2)) * (1 + g)) * INFL + k * TINY
        lo = (float(np.sum(self.mig() ** 2)) * (1 - g)) * (1.0 - 4 * U) - k * TINY
        return MR.from_lohi(max(lo, 0.0), max(hi, mid))

    def norm2_upper(self):
        return float(np.sqrt(self.norm2sq().hi()) * (1 + 2 * U) + TINY)


def _gamma(k):
    x = k * U
    if x >= 0.5:
        raise ArithmeticError("dimension too large for the gamma_k bound")
    return x / (1.0 - x) * (1.0 + 4 * U)


# -- norms and spectra -----------------------------------------------------


def norm_1_upper(A: MR) -> float:
    return float(np.max(np.sum(A.mag(), axis=0)) * INFL)


def norm_inf_upper(A: MR) -> float:
    return float(np.max(np.sum(A.mag(), axis=1)) * INFL)


def norm_2_upper(A: MR) -> float:
    return float(np.sqrt(norm_1_upper(A) * norm_inf_upper(A)) * INFL)


def gershgorin_discs(A: MR):
    """Per-row disc centers and radii for a square enclosure."""
    mag = A.mag()
    centers = np.diag(A.mid).copy()
    radsum = np.sum(mag, axis=1) - np.abs(np.diag(A.mid)) + np.diag(A.rad)
    radii = radsum * INFL + TINY
    return centers, radii


def certified_inverse_fast(A: MR) -> MR:
    """Enclosure of A^{-1} via approximate inverse + Neumann remainder."""
    n = A.mid.shape[0]
    Y = np.linalg.inv(A.mid)
    R = MR.exact(np.eye(n)) - MR.exact(Y) @ A
    r = norm_inf_upper(R)
    if not r < 1.0:
        raise ArithmeticError("not certifiably invertible in float64")
    s = r / (1.0 - r) * INFL
    colmax = np.max(np.abs(Y), axis=0)
    pad = (s * colmax) * INFL + TINY
    return MR(Y, np.broadcast_to(pad, Y.shape).copy())


def rayleigh_lower(M: MR, v: np.ndarray) -> float:
    """Rigorous lower bound on lambda_max of symmetric-enclosed M via v."""
    vm = MR.exact(v)
    num = vm.dot((M @ v.reshape(-1, 1)).reshape(-1))
    den = vm.norm2sq()
    lo = num.lo() / den.hi()
    return float(lo * (1.0 - 4 * U) - TINY)
