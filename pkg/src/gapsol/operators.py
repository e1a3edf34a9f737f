"""Structured operators on the coefficient spaces and their norms.

The product spaces are (optional scalar parameter) x k weighted-ell-1
component spaces, normed by the max over components. Induced operator
norms follow the block rule: per (output component, input component)
block take the max over input columns of the weighted output column
sum divided by the input weight; blocks combine additively across input
components and by max across output components. Rows mapping into the
parameter coordinate act as functionals with the weighted-sup dual norm.
This is the rule the validation estimates use implicitly; it is
documented and unit-tested here.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .intervals import Interval, IntervalError, sqrt_lower
from .ivarrays import CIArr, CIMat, RIArr, RIMat, dot_upper
from .seqspace import ChebSeq, FourierSeq, TaylorFourierSeq, cheb_weights, weight_powers

__all__ = [
    "CompSpec",
    "SpaceSpec",
    "FiniteBlockOp",
    "DiagOpFourier",
    "TridiagOpCheb",
    "MulOpFourier",
    "opnorm_weighted_l1",
    "block_opnorm_upper",
    "tail_norm_bounds",
]


# ---------------------------------------------------------------------
# space descriptors
# ---------------------------------------------------------------------

@dataclass(frozen=True)
class CompSpec:
    """One weighted-ell-1 component: its kind, weight and window."""

    kind: str          # "fourier" | "cheb" | "taylor-fourier"
    weight: float
    M: int             # mode window: fourier |m| <= M, cheb 0..M
    N: int = 0         # taylor orders (taylor-fourier only)

    def ncoord(self) -> int:
        if self.kind == "fourier":
            return 2 * self.M + 1
        if self.kind == "cheb":
            return self.M + 1
        if self.kind == "taylor-fourier":
            return (self.N + 1) * (2 * self.M + 1)
        raise ValueError(self.kind)

    def weights(self) -> RIArr:
        """Coordinate weights in storage order (Chebyshev embeds the
        factor 2 of the norm into the weight vector)."""
        if self.kind == "fourier":
            p = weight_powers(self.weight, self.M)
            idx = np.abs(np.arange(-self.M, self.M + 1))
            return RIArr(p.lo[idx], p.hi[idx])
        if self.kind == "cheb":
            return cheb_weights(self.weight, self.M)
        if self.kind == "taylor-fourier":
            p = weight_powers(self.weight, self.M)
            idx = np.abs(np.arange(-self.M, self.M + 1))
            one = RIArr(p.lo[idx], p.hi[idx])
            return RIArr(np.tile(one.lo, self.N + 1), np.tile(one.hi, self.N + 1))
        raise ValueError(self.kind)


@dataclass(frozen=True)
class SpaceSpec:
    """Product space: optional parameter coordinate then components."""

    comps: tuple[CompSpec, ...]
    has_param: bool = False

    def size(self) -> int:
        return int(self.has_param) + sum(c.ncoord() for c in self.comps)

    def comp_slices(self) -> list[slice]:
        out = []
        off = int(self.has_param)
        for c in self.comps:
            out.append(slice(off, off + c.ncoord()))
            off += c.ncoord()
        return out

    def weights_lo(self) -> np.ndarray:
        parts = [np.ones(1)] if self.has_param else []
        parts += [c.weights().lo for c in self.comps]
        return np.concatenate(parts)

    def weights_hi(self) -> np.ndarray:
        parts = [np.ones(1)] if self.has_param else []
        parts += [c.weights().hi for c in self.comps]
        return np.concatenate(parts)

    def norm_upper(self, mag: np.ndarray) -> float:
        """Upper bound on the product norm of a vector given entrywise
        magnitude upper bounds."""
        w = self.weights_hi()
        best = 0.0
        if self.has_param:
            best = float(mag[0])
        for sl in self.comp_slices():
            best = max(best, float(dot_upper(w[sl], mag[sl])))
        return best


def block_opnorm_upper(mag: np.ndarray, out_spec: SpaceSpec, in_spec: SpaceSpec) -> float:
    """Block-rule operator norm bound from entrywise |entry| upper bounds.

    mag has shape (out_spec.size(), in_spec.size()).
    """
    w_out = out_spec.weights_hi()
    w_in = in_spec.weights_lo()
    n_in_blocks = int(in_spec.has_param) + len(in_spec.comps)
    col_blocks = ([slice(0, 1)] if in_spec.has_param else []) + in_spec.comp_slices()
    row_blocks = ([("param", slice(0, 1))] if out_spec.has_param else []) \
        + [("seq", sl) for sl in out_spec.comp_slices()]
    totals = []
    for kind, rs in row_blocks:
        tot = 0.0
        for cs in col_blocks:
            sub = mag[rs, cs]
            if sub.size == 0:
                continue
            if kind == "param":
                blk = np.max(sub[0] / w_in[cs])
            else:
                colsums = dot_upper(w_out[rs][:, None], sub, axis=0)
                blk = np.max(colsums / w_in[cs])
            tot += float(blk)
        totals.append(tot * (1.0 + n_in_blocks * 2 ** -50))
    return max(totals)


# ---------------------------------------------------------------------
# finite block operator
# ---------------------------------------------------------------------

@dataclass
class FiniteBlockOp:
    """Dense interval matrix over (parameter + truncated sequence)
    coordinates; acts as zero outside its declared windows."""

    matrix: CIArr
    out_spec: SpaceSpec
    in_spec: SpaceSpec

    def __post_init__(self):
        expected = (self.out_spec.size(), self.in_spec.size())
        if self.matrix.shape != expected:
            raise ValueError(f"matrix shape {self.matrix.shape} != spaces {expected}")

    def apply(self, vec: CIArr) -> CIArr:
        A = CIMat.from_ci(self.matrix)
        x = CIMat.from_ci(CIArr(RIArr(vec.re.lo[:, None], vec.re.hi[:, None]),
                                RIArr(vec.im.lo[:, None], vec.im.hi[:, None])))
        out = (A @ x).to_ci()
        return CIArr(RIArr(out.re.lo[:, 0], out.re.hi[:, 0]),
                     RIArr(out.im.lo[:, 0], out.im.hi[:, 0]))

    def opnorm(self) -> Interval:
        ub = block_opnorm_upper(self.matrix.mag_upper(), self.out_spec, self.in_spec)
        return Interval(0.0, ub)


def opnorm_weighted_l1(op: FiniteBlockOp) -> Interval:
    return op.opnorm()


# ---------------------------------------------------------------------
# structured operators
# ---------------------------------------------------------------------

@dataclass(frozen=True)
class DiagOpFourier:
    """Diagonal mode multiplier: bundle form (i m + lambda), or the
    manifold form (i m + n lambda) acting as the identity on Taylor
    orders 0 and 1. The inverse form divides instead."""

    lam: Interval
    mode: str = "bundle"      # "bundle" | "manifold"
    inverse: bool = False

    def factor(self, m: int, n: int | None = None) -> "ComplexFactor":
        from .intervals import ComplexInterval
        if self.mode == "manifold" and n is not None and n <= 1:
            return ComplexInterval(Interval(1.0), Interval(0.0))
        scale = 1.0 if self.mode == "bundle" else float(n)
        z = ComplexInterval(self.lam * scale, Interval(float(m)))
        if not self.inverse:
            return z
        if z.mig_lower() <= 0.0:
            raise IntervalError(f"diagonal factor may vanish at m={m}, n={n}")
        return ComplexInterval(Interval(1.0), Interval(0.0)) / z

    def apply(self, s):
        from .intervals import ComplexInterval
        if isinstance(s, FourierSeq):
            if self.mode != "bundle":
                raise IntervalError("manifold-mode operator needs Taylor orders")
            out = s.copy()
            for i, m in enumerate(s.modes()):
                out.coeffs[i] = s.coeffs.interval(i) * self.factor(int(m))
            return out
        if isinstance(s, TaylorFourierSeq):
            out = s.copy()
            for n in range(s.N + 1):
                for i, m in enumerate(s.modes()):
                    out.coeffs[n, i] = s.coeffs.interval(n, i) * self.factor(int(m), n)
            return out
        raise TypeError(type(s))


class TridiagOpCheb:
    """[T s]_0 = 0; [T s]_m = -s_{m-1} + s_{m+1}. Grows support by one."""

    @staticmethod
    def apply(s: ChebSeq) -> ChebSeq:
        M = s.M
        out = ChebSeq.zeros(M + 1, s.omega)
        for m in range(1, M + 2):
            left = s.coeffs.interval(m - 1) if m - 1 <= M else Interval(0.0)
            right = s.coeffs.interval(m + 1) if m + 1 <= M else Interval(0.0)
            out.coeffs[m] = right - left
        return out


@dataclass(frozen=True)
class MulOpFourier:
    """v -> a v + b (g * v) for a stored multiplier sequence g; finite
    bandwidth equal to the multiplier support radius."""

    multiplier: FourierSeq
    a: Interval = field(default_factory=lambda: Interval(0.0))
    b: Interval = field(default_factory=lambda: Interval(1.0))

    def apply(self, v: FourierSeq) -> FourierSeq:
        from .seqspace import conv_fourier
        conv = conv_fourier(self.multiplier, v).scale(self.b)
        return conv + v.pad(conv.M).scale(self.a)


# ---------------------------------------------------------------------
# closed-form tail norms
# ---------------------------------------------------------------------

def tail_norm_bounds(kind: str, lam: Interval | None = None, M: int | None = None,
                     N: int | None = None, omega: float | None = None) -> Interval:
    """Closed-form norm bounds for the infinite-tail operator pieces.

    kinds: "floquet"          1/sqrt((M+1)^2 + lam^2)
           "manifold-fourier" 1/sqrt(4 lam^2 + (M+1)^2)
           "manifold-taylor"  1/(|lam| (N+1))
           "cheb-linv"        1/(2M)
           "cheb-T"           2 omega
    Evaluated with outward rounding; lam enters through the infimum of
    its magnitude, which dominates every reading of these bounds.
    """
    if kind == "floquet":
        if lam is None or M is None:
            raise ValueError("floquet tail needs lam and M")
        den = sqrt_lower(Interval.point(float(M + 1)).sq() + Interval.point(lam.mig()).sq())
        return Interval.point(den).reciprocal()
    if kind == "manifold-fourier":
        if lam is None or M is None:
            raise ValueError("manifold-fourier tail needs lam and M")
        lam_lo = Interval.point(lam.mig())
        den = sqrt_lower(4.0 * lam_lo.sq() + Interval.point(float(M + 1)).sq())
        if den <= 0.0:
            raise IntervalError("tail denominator not positive")
        return Interval.point(den).reciprocal()
    if kind == "manifold-taylor":
        if lam is None or N is None:
            raise ValueError("manifold-taylor tail needs lam and N")
        if lam.mig() <= 0.0:
            raise IntervalError("lambda interval touches zero")
        return (Interval.point(lam.mig()) * float(N + 1)).reciprocal()
    if kind == "cheb-linv":
        if M is None or M < 1:
            raise ValueError("cheb-linv tail needs M >= 1")
        return Interval.point(2.0 * M).reciprocal()
    if kind == "cheb-T":
        if omega is None:
            raise ValueError("cheb-T needs omega")
        return Interval.point(2.0) * Interval.point(omega)
    raise ValueError(f"unknown tail kind {kind!r}")
