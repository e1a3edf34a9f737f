"""Directed-rounding interval arithmetic on binary64 endpoints.

Every arithmetic operation rounds outward by one ulp per endpoint
(``math.nextafter``), so the result interval always contains the exact
real-arithmetic result of any selection of points from the operands.
Rounding-mode control is never touched; the widening is stateless and
safe under any compiler reordering or threading.

Overflow saturates to +/-inf endpoints instead of raising, so downstream
bound checks fail safely. NaN endpoints are forbidden.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction

import mpmath

_INF = math.inf


class IntervalError(ValueError):
    """Invalid interval construction or operation."""


class IntervalDivisionError(IntervalError):
    """Division by an interval containing zero."""


def _down(x: float) -> float:
    # nextafter(+inf, -inf) = DBL_MAX: an overflowed lower endpoint
    # saturates to the largest finite float, which still bounds below
    return math.nextafter(x, -_INF)


def _up(x: float) -> float:
    return math.nextafter(x, _INF)


def _scalar_like(x) -> bool:
    if isinstance(x, (Interval, int, float)):
        return True
    import numbers
    return isinstance(x, numbers.Real) and not hasattr(x, "__len__")


class Interval:
    """Closed interval [lo, hi] with lo <= hi, endpoints binary64."""

    __slots__ = ("lo", "hi")

    def __init__(self, lo, hi=None):
        lo = float(lo)
        hi = lo if hi is None else float(hi)
        if math.isnan(lo) or math.isnan(hi):
            raise IntervalError("NaN endpoint")
        if lo > hi:
            raise IntervalError(f"lo > hi: [{lo}, {hi}]")
        self.lo = lo
        self.hi = hi

    # -- constructors -------------------------------------------------

    @classmethod
    def point(cls, x) -> "Interval":
        return cls(float(x), float(x))

    @classmethod
    def hull(cls, *vals) -> "Interval":
        los, his = [], []
        for v in vals:
            if isinstance(v, Interval):
                los.append(v.lo)
                his.append(v.hi)
            else:
                los.append(float(v))
                his.append(float(v))
        return cls(min(los), max(his))

    # -- predicates / scalar views ------------------------------------

    def __contains__(self, x) -> bool:
        if isinstance(x, Interval):
            return self.lo <= x.lo and x.hi <= self.hi
        return self.lo <= float(x) <= self.hi

    def is_point(self) -> bool:
        return self.lo == self.hi

    @property
    def mid(self) -> float:
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            return 0.0 if self.lo == -_INF and self.hi == _INF else (self.lo + self.hi)
        m = 0.5 * (self.lo + self.hi)
        if not math.isfinite(m):
            m = 0.5 * self.lo + 0.5 * self.hi
        return m

    @property
    def width(self) -> float:
        return _up(self.hi - self.lo)

    def mag(self) -> float:
        """Upper bound on |x| over the interval."""
        return max(abs(self.lo), abs(self.hi))

    def mig(self) -> float:
        """Lower bound on |x| over the interval (0 if it contains 0)."""
        if self.lo <= 0.0 <= self.hi:
            return 0.0
        return min(abs(self.lo), abs(self.hi))

    def abs(self) -> "Interval":
        return Interval(self.mig(), self.mag())

    # -- arithmetic ----------------------------------------------------

    def __neg__(self) -> "Interval":
        return Interval(-self.hi, -self.lo)

    def __add__(self, other):
        if not _scalar_like(other):
            return NotImplemented
        o = other if isinstance(other, Interval) else Interval.point(other)
        # adding an exact zero is error-free
        if o.lo == 0.0 and o.hi == 0.0:
            return self
        if self.lo == 0.0 and self.hi == 0.0:
            return o
        return Interval(_down(self.lo + o.lo), _up(self.hi + o.hi))

    __radd__ = __add__

    def __sub__(self, other):
        if not _scalar_like(other):
            return NotImplemented
        o = other if isinstance(other, Interval) else Interval.point(other)
        if o.lo == 0.0 and o.hi == 0.0:
            return self
        if self.lo == 0.0 and self.hi == 0.0:
            return -o
        return Interval(_down(self.lo - o.hi), _up(self.hi - o.lo))

    def __rsub__(self, other):
        if not _scalar_like(other):
            return NotImplemented
        return Interval.point(other) - self

    def __mul__(self, other):
        if not _scalar_like(other):
            return NotImplemented
        o = other if isinstance(other, Interval) else Interval.point(other)
        if (self.lo == 0.0 and self.hi == 0.0) or (o.lo == 0.0 and o.hi == 0.0):
            return Interval(0.0, 0.0)
        ps = []
        for x in (self.lo, self.hi):
            for y in (o.lo, o.hi):
                p = x * y
                # 0 * inf: the exact set product is {0}
                if math.isnan(p):
                    p = 0.0
                ps.append(p)
        return Interval(_down(min(ps)), _up(max(ps)))

    __rmul__ = __mul__

    def reciprocal(self) -> "Interval":
        if self.lo <= 0.0 <= self.hi:
            raise IntervalDivisionError(f"0 in [{self.lo}, {self.hi}]")
        return Interval(_down(1.0 / self.hi), _up(1.0 / self.lo))

    def __truediv__(self, other):
        if not _scalar_like(other):
            return NotImplemented
        o = other if isinstance(other, Interval) else Interval.point(other)
        return self * o.reciprocal()

    def __rtruediv__(self, other):
        if not _scalar_like(other):
            return NotImplemented
        return Interval.point(other) / self

    def sq(self) -> "Interval":
        """x^2, sharper than self*self when the interval straddles 0."""
        lo, hi = self.mig(), self.mag()
        return Interval(max(0.0, _down(lo * lo)), _up(hi * hi))

    def sqrt(self) -> "Interval":
        if self.lo < 0:
            raise IntervalError("sqrt of interval with negative part")
        return Interval(max(0.0, _down(math.sqrt(self.lo))), _up(math.sqrt(self.hi)))

    def __repr__(self) -> str:
        return f"Interval({self.lo!r}, {self.hi!r})"

    def __eq__(self, other) -> bool:
        return isinstance(other, Interval) and self.lo == other.lo and self.hi == other.hi

    def __hash__(self):
        return hash((self.lo, self.hi))

    # -- serialization ---------------------------------------------------

    def to_hex(self) -> list[str]:
        return [self.lo.hex(), self.hi.hex()]

    @classmethod
    def from_hex(cls, pair) -> "Interval":
        return cls(float.fromhex(pair[0]), float.fromhex(pair[1]))


def sqrt_lower(a: Interval) -> float:
    """Rigorous lower bound on sqrt over a nonnegative interval."""
    if a.lo < 0:
        raise IntervalError("sqrt_lower of interval with negative part")
    return max(0.0, _down(math.sqrt(a.lo)))


_DECIMAL_RE = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?$")


def parse_decimal(s: str) -> Interval:
    """Tightest interval containing the exact value of a decimal literal.

    Exactly representable decimals (dyadic rationals) give a point
    interval; otherwise the enclosure is the nearest float widened one
    ulp outward, width <= 2 ulp.
    """
    s = s.strip()
    if not _DECIMAL_RE.match(s):
        raise IntervalError(f"malformed decimal literal: {s!r}")
    exact = Fraction(s)
    x = float(exact)
    if Fraction(x) == exact:
        return Interval(x, x)
    lo, hi = x, x
    if Fraction(x) > exact:
        lo = _down(x)
    else:
        hi = _up(x)
    return Interval(lo, hi)


def format_decimal(v: Interval) -> str:
    """Shortest decimal whose parse re-contains v (point intervals only
    round-trip exactly; wide intervals fall back to the hull of both
    endpoints' decimals and may widen, never shrink)."""
    if v.is_point():
        return repr(v.lo)
    return repr(v.mid)


class ComplexInterval:
    """Rectangular complex enclosure re x im."""

    __slots__ = ("re", "im")

    def __init__(self, re, im=None):
        if isinstance(re, complex) and im is None:
            self.re = Interval.point(re.real)
            self.im = Interval.point(re.imag)
            return
        self.re = re if isinstance(re, Interval) else Interval.point(re)
        if im is None:
            im = Interval.point(0.0)
        self.im = im if isinstance(im, Interval) else Interval.point(im)

    @classmethod
    def point(cls, z) -> "ComplexInterval":
        z = complex(z)
        return cls(Interval.point(z.real), Interval.point(z.imag))

    def conj(self) -> "ComplexInterval":
        return ComplexInterval(self.re, -self.im)

    def __neg__(self):
        return ComplexInterval(-self.re, -self.im)

    @staticmethod
    def _coercible(other) -> bool:
        return isinstance(other, (ComplexInterval, Interval, int, float, complex))

    def _coerce(self, other) -> "ComplexInterval":
        if isinstance(other, ComplexInterval):
            return other
        if isinstance(other, Interval):
            return ComplexInterval(other, Interval.point(0.0))
        return ComplexInterval.point(other)

    def __add__(self, other):
        if not self._coercible(other):
            return NotImplemented
        o = self._coerce(other)
        return ComplexInterval(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        if not self._coercible(other):
            return NotImplemented
        o = self._coerce(other)
        return ComplexInterval(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        if not self._coercible(other):
            return NotImplemented
        return self._coerce(other) - self

    def __mul__(self, other):
        if not self._coercible(other):
            return NotImplemented
        o = self._coerce(other)
        return ComplexInterval(self.re * o.re - self.im * o.im,
                               self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not self._coercible(other):
            return NotImplemented
        o = self._coerce(other)
        den = o.re.sq() + o.im.sq()
        num = self * o.conj()
        rec = den.reciprocal()
        return ComplexInterval(num.re * rec, num.im * rec)

    def mag_upper(self) -> float:
        """Upper bound on sup |x+iy| over the rectangle."""
        r, i = self.re.mag(), self.im.mag()
        if r == 0.0 and i == 0.0:
            return 0.0
        if i == 0.0:
            return r
        if r == 0.0:
            return i
        return _up(math.sqrt(_up(_up(r * r) + _up(i * i))))

    def mig_lower(self) -> float:
        """Lower bound on inf |x+iy| over the rectangle."""
        r, i = self.re.mig(), self.im.mig()
        return max(0.0, _down(math.sqrt(_down(r * r + i * i))))

    def __contains__(self, z) -> bool:
        z = complex(z)
        return z.real in self.re and z.imag in self.im

    def __eq__(self, other) -> bool:
        return (isinstance(other, ComplexInterval)
                and self.re == other.re and self.im == other.im)

    def __repr__(self) -> str:
        return f"ComplexInterval({self.re!r}, {self.im!r})"

    def to_hex(self) -> list[str]:
        return self.re.to_hex() + self.im.to_hex()

    @classmethod
    def from_hex(cls, quad) -> "ComplexInterval":
        return cls(Interval.from_hex(quad[:2]), Interval.from_hex(quad[2:]))


def mag_upper(z: ComplexInterval) -> float:
    return z.mag_upper()


# -- rigorous transcendental enclosures (mpmath.iv backed) -------------

_iv = mpmath.iv


def _from_mpi(x) -> Interval:
    # float() on mpf rounds to nearest; widen a ulp each way
    return Interval(_down(float(x.a)), _up(float(x.b)))


def _to_mpi(v: Interval):
    return _iv.mpf([v.lo, v.hi])


def cos_interval(v: Interval) -> Interval:
    return _from_mpi(_iv.cos(_to_mpi(v)))


def sin_interval(v: Interval) -> Interval:
    return _from_mpi(_iv.sin(_to_mpi(v)))


def exp_interval(v: Interval) -> Interval:
    out = _from_mpi(_iv.exp(_to_mpi(v)))
    return Interval(max(0.0, out.lo), out.hi)


def expi_interval(v: Interval) -> ComplexInterval:
    """Enclosure of e^{i v} for real interval v."""
    return ComplexInterval(cos_interval(v), sin_interval(v))


PI = _from_mpi(_iv.pi)
TWO_PI = _from_mpi(2 * _iv.pi)
