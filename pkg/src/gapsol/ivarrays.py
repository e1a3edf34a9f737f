"""Vectorized interval arrays and rigorous matrix products.

Elementwise containers store (lo, hi) float64 grids and round outward
one ulp per operation, mirroring gapsol.intervals on numpy arrays.

Matrix products use midpoint-radius enclosures on top of BLAS with
nearest rounding: the floating error of an inner product of length k is
bounded by (k+2)u * |A||B| (u = 2^-53), and every radius accumulation is
inflated by a generous relative factor plus an absolute underflow pad.
This keeps the heavy norm computations on dgemm while staying rigorous.
"""

from __future__ import annotations

import math

import numpy as np

from .intervals import Interval, ComplexInterval
from . import kernels

_INF = np.inf
_U = 2.0 ** -53
_ETA_PAD = 1e-300  # absolute pad absorbing underflow in radius sums


def _dn(x):
    # nextafter(+inf, -inf) = DBL_MAX: overflowed endpoints saturate
    return np.nextafter(x, -_INF)


def _upn(x):
    return np.nextafter(x, _INF)


class RIArr:
    """Real interval array: elementwise [lo, hi]."""

    __slots__ = ("lo", "hi")

    def __init__(self, lo, hi):
        self.lo = np.asarray(lo, dtype=np.float64)
        self.hi = np.asarray(hi, dtype=np.float64)

    @classmethod
    def point(cls, x) -> "RIArr":
        x = np.asarray(x, dtype=np.float64)
        return cls(x.copy(), x.copy())

    @classmethod
    def zeros(cls, shape) -> "RIArr":
        return cls(np.zeros(shape), np.zeros(shape))

    @classmethod
    def from_interval(cls, v: Interval, shape=()) -> "RIArr":
        return cls(np.full(shape, v.lo), np.full(shape, v.hi))

    @property
    def shape(self):
        return self.lo.shape

    def copy(self) -> "RIArr":
        return RIArr(self.lo.copy(), self.hi.copy())

    def __getitem__(self, idx) -> "RIArr":
        return RIArr(self.lo[idx], self.hi[idx])

    def __setitem__(self, idx, val):
        if isinstance(val, RIArr):
            self.lo[idx] = val.lo
            self.hi[idx] = val.hi
        elif isinstance(val, Interval):
            self.lo[idx] = val.lo
            self.hi[idx] = val.hi
        else:
            self.lo[idx] = val
            self.hi[idx] = val

    def _coerce(self, other):
        if isinstance(other, RIArr):
            return other.lo, other.hi
        if isinstance(other, Interval):
            return np.float64(other.lo), np.float64(other.hi)
        a = np.asarray(other, dtype=np.float64)
        return a, a

    def __neg__(self):
        return RIArr(-self.hi, -self.lo)

    @staticmethod
    def _zero_exact(alo, ahi, blo, bhi, lo, hi, flip_b=False):
        # adding/subtracting an exact zero is error-free
        az = (alo == 0.0) & (ahi == 0.0)
        bz = (blo == 0.0) & (bhi == 0.0)
        if np.any(bz):
            lo = np.where(bz, alo, lo)
            hi = np.where(bz, ahi, hi)
        if np.any(az):
            if flip_b:
                lo = np.where(az & ~bz, -np.asarray(bhi), lo)
                hi = np.where(az & ~bz, -np.asarray(blo), hi)
            else:
                lo = np.where(az & ~bz, blo, lo)
                hi = np.where(az & ~bz, bhi, hi)
        return lo, hi

    def __add__(self, other):
        blo, bhi = self._coerce(other)
        lo, hi = _dn(self.lo + blo), _upn(self.hi + bhi)
        lo, hi = self._zero_exact(self.lo, self.hi, blo, bhi, lo, hi)
        return RIArr(lo, hi)

    __radd__ = __add__

    def __sub__(self, other):
        blo, bhi = self._coerce(other)
        lo, hi = _dn(self.lo - bhi), _upn(self.hi - blo)
        lo, hi = self._zero_exact(self.lo, self.hi, blo, bhi, lo, hi, flip_b=True)
        return RIArr(lo, hi)

    def __rsub__(self, other):
        blo, bhi = self._coerce(other)
        lo, hi = _dn(blo - self.hi), _upn(bhi - self.lo)
        lo, hi = self._zero_exact(blo, bhi, self.lo, self.hi, lo, hi, flip_b=True)
        return RIArr(lo, hi)

    def __mul__(self, other):
        blo, bhi = self._coerce(other)
        p1 = self.lo * blo
        p2 = self.lo * bhi
        p3 = self.hi * blo
        p4 = self.hi * bhi
        lo = _dn(np.minimum(np.minimum(p1, p2), np.minimum(p3, p4)))
        hi = _upn(np.maximum(np.maximum(p1, p2), np.maximum(p3, p4)))
        # exact-zero factors annihilate without widening
        z = ((self.lo == 0.0) & (self.hi == 0.0)) | ((blo == 0.0) & (bhi == 0.0))
        if np.any(z):
            lo = np.where(z, 0.0, lo)
            hi = np.where(z, 0.0, hi)
        return RIArr(lo, hi)

    __rmul__ = __mul__

    def reciprocal(self) -> "RIArr":
        if np.any((self.lo <= 0.0) & (self.hi >= 0.0)):
            raise ZeroDivisionError("interval array contains zero")
        return RIArr(_dn(1.0 / self.hi), _upn(1.0 / self.lo))

    def __truediv__(self, other):
        if isinstance(other, RIArr):
            return self * other.reciprocal()
        if isinstance(other, Interval):
            return self * other.reciprocal()
        return self * RIArr.point(other).reciprocal()

    def sq(self) -> "RIArr":
        mig = np.where((self.lo <= 0.0) & (self.hi >= 0.0), 0.0,
                       np.minimum(np.abs(self.lo), np.abs(self.hi)))
        mag = np.maximum(np.abs(self.lo), np.abs(self.hi))
        return RIArr(np.maximum(0.0, _dn(mig * mig)), _upn(mag * mag))

    def mag(self) -> np.ndarray:
        """Elementwise sup |x|."""
        return np.maximum(np.abs(self.lo), np.abs(self.hi))

    def interval(self, *idx) -> Interval:
        if idx:
            return Interval(float(self.lo[idx]), float(self.hi[idx]))
        return Interval(float(self.lo), float(self.hi))

    def hull_interval(self) -> Interval:
        """Interval hull of all entries."""
        return Interval(float(np.min(self.lo)), float(np.max(self.hi)))

    def sum_interval(self) -> Interval:
        if not (np.any(self.lo) or np.any(self.hi)):
            return Interval(0.0, 0.0)
        n = self.lo.size
        f = 1.0 + (n + 2) * _U
        lo = float(np.sum(self.lo))
        hi = float(np.sum(self.hi))
        lo = lo - abs(lo) * (f - 1.0) - _ETA_PAD
        hi = hi + abs(hi) * (f - 1.0) + _ETA_PAD
        return Interval(lo, hi)


class CIArr:
    """Complex interval array: rectangular enclosures per entry."""

    __slots__ = ("re", "im")

    def __init__(self, re: RIArr, im: RIArr):
        self.re = re
        self.im = im

    @classmethod
    def point(cls, z) -> "CIArr":
        z = np.asarray(z, dtype=np.complex128)
        return cls(RIArr.point(z.real), RIArr.point(z.imag))

    @classmethod
    def zeros(cls, shape) -> "CIArr":
        return cls(RIArr.zeros(shape), RIArr.zeros(shape))

    @property
    def shape(self):
        return self.re.shape

    def copy(self) -> "CIArr":
        return CIArr(self.re.copy(), self.im.copy())

    def __getitem__(self, idx) -> "CIArr":
        return CIArr(self.re[idx], self.im[idx])

    def __setitem__(self, idx, val):
        if isinstance(val, CIArr):
            self.re[idx], self.im[idx] = val.re, val.im
        elif isinstance(val, ComplexInterval):
            self.re[idx] = val.re
            self.im[idx] = val.im
        else:
            z = np.asarray(val, dtype=np.complex128)
            self.re[idx] = z.real
            self.im[idx] = z.imag

    def conj(self) -> "CIArr":
        return CIArr(self.re, -self.im)

    def _coerce(self, other) -> "CIArr":
        if isinstance(other, CIArr):
            return other
        if isinstance(other, RIArr):
            return CIArr(other, RIArr.zeros(other.shape))
        if isinstance(other, ComplexInterval):
            return CIArr(RIArr.from_interval(other.re), RIArr.from_interval(other.im))
        if isinstance(other, Interval):
            return CIArr(RIArr.from_interval(other), RIArr.from_interval(Interval(0.0)))
        return CIArr.point(other)

    def __neg__(self):
        return CIArr(-self.re, -self.im)

    def __add__(self, other):
        o = self._coerce(other)
        return CIArr(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        return CIArr(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        return CIArr(self.re * o.re - self.im * o.im,
                     self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        den = (o.re.sq() + o.im.sq()).reciprocal()
        num = self * o.conj()
        return CIArr(num.re * den, num.im * den)

    def mag_upper(self) -> np.ndarray:
        return _cmag_upper(self.re.mag(), self.im.mag())

    def interval(self, *idx) -> ComplexInterval:
        return ComplexInterval(self.re.interval(*idx), self.im.interval(*idx))

    def as4(self):
        return (self.re.lo, self.re.hi, self.im.lo, self.im.hi)

    @classmethod
    def from4(cls, t) -> "CIArr":
        return cls(RIArr(t[0], t[1]), RIArr(t[2], t[3]))


def _cmag_upper(r: np.ndarray, i: np.ndarray) -> np.ndarray:
    """sup |x+iy| from componentwise magnitudes, exact where one is 0."""
    full = _upn(np.sqrt(_upn(_upn(r * r) + _upn(i * i))))
    out = np.where(i == 0.0, r, np.where(r == 0.0, i, full))
    return out


def conv2c(a: CIArr, b: CIArr) -> CIArr:
    """Rigorous full 2-D convolution of complex interval grids."""
    return CIArr.from4(kernels.conv2_complex(a.as4(), b.as4()))


def conv2r(a: RIArr, b: RIArr) -> RIArr:
    out = kernels.conv2_real((a.lo, a.hi), (b.lo, b.hi))
    return RIArr(out[0], out[1])


# ---------------------------------------------------------------------
# rigorous dot/sum helpers
# ---------------------------------------------------------------------

def sum_upper(x: np.ndarray) -> float:
    """Upper bound on the exact sum of nonnegative floats."""
    s = float(np.sum(x))
    if s == 0.0:
        return 0.0
    n = x.size
    return s * (1.0 + (n + 2) * _U) + _ETA_PAD


def dot_upper(w, x, axis=None):
    """Upper bound on sum(w*x) over `axis` for nonnegative w, x."""
    p = np.asarray(w) * np.asarray(x)
    s = np.sum(p, axis=axis)
    n = p.size if axis is None else p.shape[axis]
    out = s * (1.0 + (n + 4) * _U) + _ETA_PAD
    return np.where(s == 0.0, 0.0, out) if isinstance(out, np.ndarray) else (0.0 if s == 0.0 else out)


# ---------------------------------------------------------------------
# rigorous midpoint-radius matrix products
# ---------------------------------------------------------------------

class RIMat:
    """Real interval matrix in midpoint-radius form."""

    __slots__ = ("mid", "rad")

    def __init__(self, mid, rad=None):
        self.mid = np.asarray(mid, dtype=np.float64)
        self.rad = np.zeros_like(self.mid) if rad is None else np.asarray(rad, dtype=np.float64)

    @classmethod
    def from_ri(cls, a: RIArr) -> "RIMat":
        mid = 0.5 * (a.lo + a.hi)
        # upward-rounded radius covering both endpoint gaps
        rad = _upn(np.maximum(_upn(a.hi - mid), _upn(mid - a.lo)))
        rad[a.lo == a.hi] = 0.0
        mid = np.where(a.lo == a.hi, a.lo, mid)
        return cls(mid, rad)

    def to_ri(self) -> RIArr:
        return RIArr(_dn(self.mid - self.rad), _upn(self.mid + self.rad))

    def __add__(self, other):
        m = self.mid + other.mid
        r = (np.abs(self.mid) + np.abs(other.mid)) * (2 * _U) + \
            (self.rad + other.rad) * (1.0 + 4 * _U) + _ETA_PAD
        return RIMat(m, r)

    def __sub__(self, other):
        m = self.mid - other.mid
        r = (np.abs(self.mid) + np.abs(other.mid)) * (2 * _U) + \
            (self.rad + other.rad) * (1.0 + 4 * _U) + _ETA_PAD
        return RIMat(m, r)

    def __neg__(self):
        return RIMat(-self.mid, self.rad.copy())

    def __matmul__(self, other: "RIMat") -> "RIMat":
        return rig_matmul(self, other)

    def abs_upper(self) -> np.ndarray:
        return _upn(np.abs(self.mid) + self.rad)


def rig_matmul(A: RIMat, B: RIMat) -> RIMat:
    """Enclosure of A@B for real interval matrices (midrad, BLAS-backed)."""
    k = A.mid.shape[-1]
    gamma = (k + 2) * _U
    absA = np.abs(A.mid)
    absB = np.abs(B.mid)
    Cm = A.mid @ B.mid
    R = gamma * (absA @ absB)
    a_has = np.any(A.rad)
    b_has = np.any(B.rad)
    if b_has:
        R = R + absA @ B.rad
    if a_has:
        R = R + A.rad @ (absB + B.rad) if b_has else R + A.rad @ absB
    R = R * (1.0 + (16 + 4 * k) * _U) + k * 1e-310
    return RIMat(Cm, R)


class CIMat:
    """Complex interval matrix: midpoint complex128 plus re/im radii."""

    __slots__ = ("re", "im")

    def __init__(self, re: RIMat, im: RIMat):
        self.re = re
        self.im = im

    @classmethod
    def from_ci(cls, a: CIArr) -> "CIMat":
        return cls(RIMat.from_ri(a.re), RIMat.from_ri(a.im))

    @classmethod
    def point(cls, z) -> "CIMat":
        z = np.asarray(z, dtype=np.complex128)
        return cls(RIMat(z.real.copy()), RIMat(z.imag.copy()))

    def to_ci(self) -> CIArr:
        return CIArr(self.re.to_ri(), self.im.to_ri())

    @property
    def shape(self):
        return self.re.mid.shape

    def __matmul__(self, other: "CIMat") -> "CIMat":
        re = rig_matmul(self.re, other.re) - rig_matmul(self.im, other.im)
        im = rig_matmul(self.re, other.im) + rig_matmul(self.im, other.re)
        return CIMat(re, im)

    def __add__(self, other: "CIMat") -> "CIMat":
        return CIMat(self.re + other.re, self.im + other.im)

    def __sub__(self, other: "CIMat") -> "CIMat":
        return CIMat(self.re - other.re, self.im - other.im)

    def __neg__(self):
        return CIMat(-self.re, -self.im)

    def mag_upper(self) -> np.ndarray:
        return _cmag_upper(self.re.abs_upper(), self.im.abs_upper())
