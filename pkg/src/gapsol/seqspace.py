"""Weighted ell-1 coefficient spaces and their calculus.

Three spaces: two-sided Fourier sequences with geometric weight nu,
one-sided stacks of Fourier sequences (Taylor orders), and one-sided
Chebyshev sequences with weight omega and the factor-2 norm convention

    ||s||_C = |s_0| + 2 sum_{m>=1} |s_m| omega^m.

Sequences store dense interval coefficients over their declared support
window; all norms are rigorous two-sided enclosures with the upper
endpoint serving as the certified bound. Storage is immutable by
convention: operations return new sequences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .intervals import ComplexInterval, Interval, IntervalError, expi_interval
from .ivarrays import CIArr, RIArr, conv2c, conv2r, dot_upper

__all__ = [
    "IndexRange",
    "FourierSeq",
    "TaylorFourierSeq",
    "ChebSeq",
    "conv_fourier",
    "conv_tf",
    "conv_cheb",
    "norm",
    "project",
    "eval_cheb",
    "eval_cheb_pm1",
    "eval_fourier",
    "support_lemma_check",
    "weight_powers",
]

_INF_IDX = None  # IndexRange "hi" sentinel for unbounded ranges


@dataclass(frozen=True)
class IndexRange:
    """Index set on |m| (fourier) or n (taylor/cheb): lo <= . <= hi.

    hi=None means unbounded. Constructors mirror the closed/half-open
    conventions used in the validation estimates: closed(lo, hi) is
    [lo, hi]; above(Q) is (Q, inf); between(P, Q) is (P, Q].
    """

    kind: str
    lo: int
    hi: int | None

    _KINDS = ("fourier", "taylor", "cheb")

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise ValueError(f"kind must be one of {self._KINDS}")
        if self.lo < 0 or (self.hi is not None and self.hi < self.lo):
            raise ValueError(f"bad index range [{self.lo}, {self.hi}]")

    @classmethod
    def closed(cls, kind, lo, hi):
        return cls(kind, lo, hi)

    @classmethod
    def above(cls, kind, q):
        return cls(kind, q + 1, None)

    @classmethod
    def between(cls, kind, p, q):
        return cls(kind, p + 1, q)

    def contains(self, idx: int) -> bool:
        key = abs(idx) if self.kind == "fourier" else idx
        if key < self.lo:
            return False
        return self.hi is None or key <= self.hi


def weight_powers(w: float, n: int) -> RIArr:
    """Rigorous enclosures of w^0 .. w^n (w an exact float >= 1)."""
    lo = np.empty(n + 1)
    hi = np.empty(n + 1)
    cur = Interval.point(1.0)
    wv = Interval.point(w)
    for k in range(n + 1):
        lo[k], hi[k] = cur.lo, cur.hi
        cur = cur * wv
    return RIArr(lo, hi)


def _check_weight(w: float) -> float:
    w = float(w)
    if not (w >= 1.0):
        raise IntervalError(f"geometric weight must be >= 1, got {w}")
    return w


class FourierSeq:
    """Two-sided sequence over modes -M..M with weight nu."""

    def __init__(self, coeffs: CIArr, nu: float):
        if coeffs.shape[-1] % 2 != 1:
            raise ValueError("two-sided storage needs an odd number of modes")
        self.coeffs = coeffs
        self.nu = _check_weight(nu)

    # -- constructors ----------------------------------------------------

    @classmethod
    def zeros(cls, M: int, nu: float) -> "FourierSeq":
        return cls(CIArr.zeros(2 * M + 1), nu)

    @classmethod
    def from_complex(cls, arr, nu: float) -> "FourierSeq":
        return cls(CIArr.point(np.asarray(arr, dtype=np.complex128)), nu)

    @classmethod
    def delta(cls, nu: float, M: int = 0) -> "FourierSeq":
        s = cls.zeros(M, nu)
        s.coeffs[M] = 1.0 + 0.0j
        return s

    @classmethod
    def cos2(cls, nu: float) -> "FourierSeq":
        """Fourier coefficients of cos(2 theta): 1/2 at modes +-2."""
        s = cls.zeros(2, nu)
        s.coeffs[0] = 0.5 + 0.0j
        s.coeffs[4] = 0.5 + 0.0j
        return s

    # -- basic structure ---------------------------------------------------

    @property
    def M(self) -> int:
        return (self.coeffs.shape[-1] - 1) // 2

    def modes(self) -> np.ndarray:
        return np.arange(-self.M, self.M + 1)

    def __getitem__(self, m: int) -> ComplexInterval:
        return self.coeffs.interval(m + self.M)

    def copy(self) -> "FourierSeq":
        return FourierSeq(self.coeffs.copy(), self.nu)

    def pad(self, M_new: int) -> "FourierSeq":
        if M_new < self.M:
            raise ValueError("pad must not shrink the window")
        out = FourierSeq.zeros(M_new, self.nu)
        out.coeffs[M_new - self.M:M_new + self.M + 1] = self.coeffs
        return out

    def __add__(self, other: "FourierSeq") -> "FourierSeq":
        a, b = _align_f(self, other)
        return FourierSeq(a.coeffs + b.coeffs, a.nu)

    def __sub__(self, other: "FourierSeq") -> "FourierSeq":
        a, b = _align_f(self, other)
        return FourierSeq(a.coeffs - b.coeffs, a.nu)

    def scale(self, factor) -> "FourierSeq":
        return FourierSeq(self.coeffs * factor, self.nu)

    def conj_flip(self) -> "FourierSeq":
        """The sequence m -> conj(s_{-m})."""
        re = RIArr(self.coeffs.re.lo[::-1].copy(), self.coeffs.re.hi[::-1].copy())
        im = RIArr(-self.coeffs.im.hi[::-1].copy(), -self.coeffs.im.lo[::-1].copy())
        return FourierSeq(CIArr(re, im), self.nu)

    def is_conjugate_symmetric(self) -> bool:
        flip = self.conj_flip()
        return (np.array_equal(self.coeffs.re.lo, flip.coeffs.re.lo)
                and np.array_equal(self.coeffs.re.hi, flip.coeffs.re.hi)
                and np.array_equal(self.coeffs.im.lo, flip.coeffs.im.lo)
                and np.array_equal(self.coeffs.im.hi, flip.coeffs.im.hi))

    def support_in(self, r: IndexRange) -> bool:
        mag = self.coeffs.mag_upper()
        for i, m in enumerate(self.modes()):
            if mag[i] != 0.0 and not r.contains(m):
                return False
        return True

    # -- norm / eval -------------------------------------------------------

    def norm(self) -> Interval:
        wts = weight_powers(self.nu, self.M)
        idx = np.abs(self.modes())
        w = RIArr(wts.lo[idx], wts.hi[idx])
        mags = RIArr(_mig_c(self.coeffs), self.coeffs.mag_upper())
        total = (mags * w).sum_interval()
        return Interval(max(0.0, total.lo), total.hi)

    def eval(self, theta: Interval) -> ComplexInterval:
        return eval_fourier(self, theta)


def _mig_c(c: CIArr) -> np.ndarray:
    """Elementwise lower bound on |z| (rounded down)."""
    r = np.where((c.re.lo <= 0) & (c.re.hi >= 0), 0.0,
                 np.minimum(np.abs(c.re.lo), np.abs(c.re.hi)))
    i = np.where((c.im.lo <= 0) & (c.im.hi >= 0), 0.0,
                 np.minimum(np.abs(c.im.lo), np.abs(c.im.hi)))
    s = np.nextafter(np.nextafter(r * r, -np.inf) + np.nextafter(i * i, -np.inf), -np.inf)
    out = np.nextafter(np.sqrt(np.maximum(s, 0.0)), -np.inf)
    return np.maximum(out, 0.0)


def _align_f(a: FourierSeq, b: FourierSeq):
    if a.nu != b.nu:
        raise IntervalError(f"mismatched weights: {a.nu} vs {b.nu}")
    M = max(a.M, b.M)
    return a.pad(M), b.pad(M)


class TaylorFourierSeq:
    """One-sided stack of Fourier sequences: orders 0..N, shared nu."""

    def __init__(self, coeffs: CIArr, nu: float):
        if coeffs.shape[-1] % 2 != 1:
            raise ValueError("two-sided storage needs an odd number of modes")
        self.coeffs = coeffs  # shape (N+1, 2M+1)
        self.nu = _check_weight(nu)

    @classmethod
    def zeros(cls, N: int, M: int, nu: float) -> "TaylorFourierSeq":
        return cls(CIArr.zeros((N + 1, 2 * M + 1)), nu)

    @classmethod
    def from_complex(cls, arr, nu: float) -> "TaylorFourierSeq":
        return cls(CIArr.point(np.asarray(arr, dtype=np.complex128)), nu)

    @classmethod
    def from_orders(cls, orders: list[FourierSeq]) -> "TaylorFourierSeq":
        nu = orders[0].nu
        M = max(o.M for o in orders)
        out = cls.zeros(len(orders) - 1, M, nu)
        for n, o in enumerate(orders):
            op = o.pad(M)
            out.coeffs[n] = op.coeffs
        return out

    @property
    def N(self) -> int:
        return self.coeffs.shape[0] - 1

    @property
    def M(self) -> int:
        return (self.coeffs.shape[-1] - 1) // 2

    def modes(self) -> np.ndarray:
        return np.arange(-self.M, self.M + 1)

    def order(self, n: int) -> FourierSeq:
        return FourierSeq(self.coeffs[n], self.nu)

    def copy(self) -> "TaylorFourierSeq":
        return TaylorFourierSeq(self.coeffs.copy(), self.nu)

    def pad(self, N_new: int, M_new: int) -> "TaylorFourierSeq":
        if N_new < self.N or M_new < self.M:
            raise ValueError("pad must not shrink the window")
        out = TaylorFourierSeq.zeros(N_new, M_new, self.nu)
        out.coeffs[0:self.N + 1, M_new - self.M:M_new + self.M + 1] = self.coeffs
        return out

    def __add__(self, other: "TaylorFourierSeq") -> "TaylorFourierSeq":
        a, b = _align_tf(self, other)
        return TaylorFourierSeq(a.coeffs + b.coeffs, a.nu)

    def __sub__(self, other: "TaylorFourierSeq") -> "TaylorFourierSeq":
        a, b = _align_tf(self, other)
        return TaylorFourierSeq(a.coeffs - b.coeffs, a.nu)

    def scale(self, factor) -> "TaylorFourierSeq":
        return TaylorFourierSeq(self.coeffs * factor, self.nu)

    def norm(self) -> Interval:
        total = Interval(0.0)
        for n in range(self.N + 1):
            total = total + self.order(n).norm()
        return Interval(max(0.0, total.lo), total.hi)

    def is_conjugate_symmetric(self) -> bool:
        return all(self.order(n).is_conjugate_symmetric() for n in range(self.N + 1))


def _align_tf(a: TaylorFourierSeq, b: TaylorFourierSeq):
    if a.nu != b.nu:
        raise IntervalError(f"mismatched weights: {a.nu} vs {b.nu}")
    N, M = max(a.N, b.N), max(a.M, b.M)
    return a.pad(N, M), b.pad(N, M)


class ChebSeq:
    """One-sided Chebyshev coefficients 0..M with weight omega."""

    def __init__(self, coeffs: RIArr, omega: float):
        self.coeffs = coeffs
        self.omega = _check_weight(omega)

    @classmethod
    def zeros(cls, M: int, omega: float) -> "ChebSeq":
        return cls(RIArr.zeros(M + 1), omega)

    @classmethod
    def from_real(cls, arr, omega: float) -> "ChebSeq":
        return cls(RIArr.point(np.asarray(arr, dtype=np.float64)), omega)

    @property
    def M(self) -> int:
        return self.coeffs.shape[-1] - 1

    def __getitem__(self, m: int) -> Interval:
        return self.coeffs.interval(m)

    def copy(self) -> "ChebSeq":
        return ChebSeq(self.coeffs.copy(), self.omega)

    def pad(self, M_new: int) -> "ChebSeq":
        if M_new < self.M:
            raise ValueError("pad must not shrink the window")
        out = ChebSeq.zeros(M_new, self.omega)
        out.coeffs[0:self.M + 1] = self.coeffs
        return out

    def __add__(self, other: "ChebSeq") -> "ChebSeq":
        a, b = _align_c(self, other)
        return ChebSeq(a.coeffs + b.coeffs, a.omega)

    def __sub__(self, other: "ChebSeq") -> "ChebSeq":
        a, b = _align_c(self, other)
        return ChebSeq(a.coeffs - b.coeffs, a.omega)

    def scale(self, factor) -> "ChebSeq":
        return ChebSeq(self.coeffs * factor, self.omega)

    def norm(self) -> Interval:
        w = cheb_weights(self.omega, self.M)
        mags = RIArr(np.where((self.coeffs.lo <= 0) & (self.coeffs.hi >= 0), 0.0,
                              np.minimum(np.abs(self.coeffs.lo), np.abs(self.coeffs.hi))),
                     self.coeffs.mag())
        total = (mags * w).sum_interval()
        return Interval(max(0.0, total.lo), total.hi)

    def eval(self, t: Interval) -> Interval:
        return eval_cheb(self, t)

    def eval_pm1(self, sign: int) -> Interval:
        return eval_cheb_pm1(self, sign)


def _align_c(a: ChebSeq, b: ChebSeq):
    if a.omega != b.omega:
        raise IntervalError(f"mismatched weights: {a.omega} vs {b.omega}")
    M = max(a.M, b.M)
    return a.pad(M), b.pad(M)


def cheb_weights(omega: float, M: int) -> RIArr:
    """Norm weights (1, 2w, 2w^2, ...) as rigorous enclosures."""
    p = weight_powers(omega, M)
    lo = p.lo.copy()
    hi = p.hi.copy()
    lo[1:] = np.nextafter(2.0 * lo[1:], -np.inf)
    hi[1:] = np.nextafter(2.0 * hi[1:], np.inf)
    lo[0], hi[0] = 1.0, 1.0
    return RIArr(lo, hi)


# ---------------------------------------------------------------------
# convolutions
# ---------------------------------------------------------------------

def conv_fourier(p: FourierSeq, q: FourierSeq) -> FourierSeq:
    """(p*q)_m = sum_{m1+m2=m} p_{m1} q_{m2}; support grows by each M."""
    if p.nu != q.nu:
        raise IntervalError(f"mismatched weights: {p.nu} vs {q.nu}")
    a = CIArr(RIArr(p.coeffs.re.lo[None, :], p.coeffs.re.hi[None, :]),
              RIArr(p.coeffs.im.lo[None, :], p.coeffs.im.hi[None, :]))
    b = CIArr(RIArr(q.coeffs.re.lo[None, :], q.coeffs.re.hi[None, :]),
              RIArr(q.coeffs.im.lo[None, :], q.coeffs.im.hi[None, :]))
    out = conv2c(a, b)
    return FourierSeq(out[0], p.nu)


def conv_tf(p: TaylorFourierSeq, q: TaylorFourierSeq) -> TaylorFourierSeq:
    """Cauchy product in the Taylor order, convolution in the mode."""
    if p.nu != q.nu:
        raise IntervalError(f"mismatched weights: {p.nu} vs {q.nu}")
    return TaylorFourierSeq(conv2c(p.coeffs, q.coeffs), p.nu)


def conv_cheb(p: ChebSeq, q: ChebSeq) -> ChebSeq:
    """Reflected-index convolution: (p*q)_m = sum over integer pairs
    m1+m2=m of p_{|m1|} q_{|m2|}."""
    if p.omega != q.omega:
        raise IntervalError(f"mismatched weights: {p.omega} vs {q.omega}")
    a = _mirror(p.coeffs)
    b = _mirror(q.coeffs)
    full = conv2r(RIArr(a.lo[None, :], a.hi[None, :]),
                  RIArr(b.lo[None, :], b.hi[None, :]))
    n0 = (p.M) + (q.M)  # index of m=0 in the full two-sided result
    return ChebSeq(RIArr(full.lo[0, n0:], full.hi[0, n0:]), p.omega)


def _mirror(c: RIArr) -> RIArr:
    return RIArr(np.concatenate([c.lo[:0:-1], c.lo]),
                 np.concatenate([c.hi[:0:-1], c.hi]))


# ---------------------------------------------------------------------
# norms / projections (generic fronts)
# ---------------------------------------------------------------------

def norm(s) -> Interval:
    return s.norm()


def project(s, r: IndexRange):
    """Keep coefficients on r, zero elsewhere. Idempotent."""
    if isinstance(s, FourierSeq):
        if r.kind != "fourier":
            raise ValueError("range kind must be 'fourier'")
        out = s.copy()
        for i, m in enumerate(s.modes()):
            if not r.contains(m):
                out.coeffs[i] = 0.0 + 0.0j
        return out
    if isinstance(s, ChebSeq):
        if r.kind != "cheb":
            raise ValueError("range kind must be 'cheb'")
        out = s.copy()
        for m in range(s.M + 1):
            if not r.contains(m):
                out.coeffs[m] = 0.0
        return out
    if isinstance(s, TaylorFourierSeq):
        out = s.copy()
        if r.kind == "taylor":
            for n in range(s.N + 1):
                if not r.contains(n):
                    out.coeffs[n] = CIArr.zeros(2 * s.M + 1)
        elif r.kind == "fourier":
            for i, m in enumerate(s.modes()):
                if not r.contains(m):
                    out.coeffs[:, i] = CIArr.zeros(s.N + 1)
        else:
            raise ValueError("range kind must be 'taylor' or 'fourier'")
        return out
    raise TypeError(f"cannot project {type(s)}")


# ---------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------

def eval_fourier(s: FourierSeq, theta: Interval) -> ComplexInterval:
    """Enclosure of sum_m s_m e^{i m theta}."""
    M = s.M
    e1 = expi_interval(theta)
    pos = [ComplexInterval(Interval(1.0), Interval(0.0))]
    for _ in range(M):
        pos.append(pos[-1] * e1)
    out = ComplexInterval(Interval(0.0), Interval(0.0))
    for i, m in enumerate(s.modes()):
        em = pos[m] if m >= 0 else pos[-m].conj()
        out = out + s.coeffs.interval(i) * em
    return out


def eval_cheb(s: ChebSeq, t: Interval) -> Interval:
    """Enclosure of s_0 + 2 sum s_m T_m(t) for t in [-1, 1].

    Uses T_m(cos alpha) = cos(m alpha) with a rigorous arccos, which
    stays tight for high degree where the three-term recurrence in
    interval arithmetic would blow up.
    """
    if t.lo < -1.0 or t.hi > 1.0:
        raise IntervalError(f"t outside [-1, 1]: [{t.lo}, {t.hi}]")
    if t.lo == t.hi and t.lo in (-1.0, 1.0):
        return eval_cheb_pm1(s, int(t.lo))
    # T_m(t) = Re(z^m) with z = t + i sqrt(1 - t^2) on the unit circle;
    # the power recurrence stays tight where the three-term recurrence
    # in interval arithmetic would blow up exponentially
    root = (1.0 - t.sq()).sqrt()
    z = ComplexInterval(t, root)
    zm = ComplexInterval(Interval(1.0), Interval(0.0))
    out = s.coeffs.interval(0)
    for m in range(1, s.M + 1):
        zm = zm * z
        out = out + 2.0 * s.coeffs.interval(m) * zm.re
    return out


def eval_cheb_pm1(s: ChebSeq, sign: int) -> Interval:
    """s(+-1) = s_0 + 2 sum (+-1)^m s_m."""
    signs = np.ones(s.M + 1)
    if sign < 0:
        signs[1::2] = -1.0
    signs[0] = 0.5  # fold the factor-2 convention: 2*0.5*s_0
    acc = (s.coeffs * (2.0 * signs)).sum_interval()
    return acc


# ---------------------------------------------------------------------
# support lemma checker (test utility)
# ---------------------------------------------------------------------

def support_lemma_check(p: FourierSeq, q: FourierSeq, M: int) -> bool:
    """For p supported in [0, M]: conv with q supported in (2M, inf)
    vanishes on [0, M]; conv with q supported in [0, M] is supported in
    [0, 2M]. Returns True when the applicable identity holds exactly."""
    inner = IndexRange.closed("fourier", 0, M)
    outer = IndexRange.above("fourier", 2 * M)
    if not p.support_in(inner):
        raise ValueError("p must be supported in [0, M]")
    conv = conv_fourier(p, q)
    if q.support_in(outer):
        proj = project(conv, inner)
        return bool(np.all(proj.coeffs.mag_upper() == 0.0))
    if q.support_in(inner):
        return conv.support_in(IndexRange.closed("fourier", 0, 2 * M))
    raise ValueError("q must be supported in [0, M] or (2M, inf)")
