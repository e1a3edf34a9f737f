"""Stage 1: rigorous validation of the stable Floquet exponent and
bundle direction of the lattice periodic orbit.

The unknowns are (lambda, v1, v2): the exponent and the two nontrivial
components of the bundle, as two-sided Fourier coefficients. A phase
functional sum_{|m|<=M} v1_m = l removes the scaling freedom. The
residual, defect and Lipschitz bounds (Y, Z1, Z2) feed the radii engine;
a proved certificate pins lambda inside a negative interval of radius
r_F and is the input to the manifold stage.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import numerics
from .certify import KBounds, radii_from_bounds
from .intervals import ComplexInterval, Interval
from .ivarrays import CIArr, CIMat, RIArr
from .operators import CompSpec, SpaceSpec, block_opnorm_upper, tail_norm_bounds
from .seqspace import weight_powers

__all__ = ["BundleProblem", "BundleCandidate", "BundleCertificate",
           "F_bundle", "DF_bundle_interval", "bound_Y_bundle",
           "bound_Z1_bundle", "bound_Z2_bundle", "validate_bundle",
           "compute_candidate"]

MARGINAL_GAP = 1e-12


@dataclass(frozen=True)
class BundleProblem:
    a: Interval
    b: Interval
    c: Interval
    nu: float
    l: float
    M: int

    def __post_init__(self):
        if not (self.nu >= 1.0):
            raise ValueError("nu must be >= 1")
        if self.M < 2:
            raise ValueError("M must be >= 2 (the potential band must fit)")


@dataclass
class BundleCandidate:
    lam: float
    v1: np.ndarray
    v2: np.ndarray

    @property
    def M(self) -> int:
        return (self.v1.size - 1) // 2

    def check(self):
        if not (self.lam < 0.0):
            raise ValueError(f"candidate exponent must be negative, got {self.lam}")
        if not (np.array_equal(self.v1, np.conj(self.v1[::-1]))
                and np.array_equal(self.v2, np.conj(self.v2[::-1]))):
            raise ValueError("candidate violates conjugate symmetry")


@dataclass
class BundleCertificate:
    verdict: str
    Y: float
    Z1: float
    Z2: float
    r_F: float
    lam: float
    lam_interval: Interval
    Af_norm: float
    Z1_finite: float
    Z1_tail: float
    problem: BundleProblem
    candidate: BundleCandidate
    Af: np.ndarray = field(repr=False, default=None)

    @property
    def proved(self) -> bool:
        return self.verdict.startswith("proved")

    def to_json(self) -> dict:
        p = self.problem
        return {
            "stage": "bundle",
            "params": {"a": p.a.to_hex(), "b": p.b.to_hex(), "c": p.c.to_hex()},
            "M": p.M,
            "nu": p.nu.hex(),
            "l": p.l.hex(),
            "lambda_bar_hex": self.lam.hex(),
            "Y_hex": self.Y.hex(),
            "Z1_hex": self.Z1.hex(),
            "Z2_hex": self.Z2.hex(),
            "r_hex": self.r_F.hex(),
            "verdict": self.verdict,
        }


def compute_candidate(prob: BundleProblem, oracle_tol: float = 1e-6) -> BundleCandidate:
    """Eigen-solve plus Newton refinement, symmetrized bit-exactly."""
    a, b = prob.a.mid, prob.b.mid
    lam, v1, v2 = numerics.floquet_eig(a, b, prob.M, l=prob.l, oracle_tol=oracle_tol)
    lam, v1, v2, _ = numerics.newton_refine_bundle(a, b, lam, v1, v2, prob.nu, prob.l)
    return BundleCandidate(lam=lam, v1=v1, v2=v2)


# ---------------------------------------------------------------------
# rigorous map pieces
# ---------------------------------------------------------------------

def _gamma_conv_interval(v: CIArr, M_out: int) -> CIArr:
    """Rigorous convolution with the cos(2 theta) coefficients, output
    restricted to modes [-M_out, M_out] (input two-sided)."""
    from .kernels import conv2_complex
    g = CIArr.zeros((1, 5))
    g[0, 0] = 0.5 + 0.0j
    g[0, 4] = 0.5 + 0.0j
    a4 = (v.re.lo[None, :], v.re.hi[None, :], v.im.lo[None, :], v.im.hi[None, :])
    out4 = conv2_complex(a4, (g.re.lo, g.re.hi, g.im.lo, g.im.hi))
    out = CIArr(RIArr(out4[0][0], out4[1][0]), RIArr(out4[2][0], out4[3][0]))
    M_in = (v.shape[-1] - 1) // 2 + 2
    k = M_in - M_out
    if k < 0:
        pad = CIArr.zeros(2 * M_out + 1)
        pad[-k:-k + out.shape[-1]] = out
        return pad
    return out[k:out.shape[-1] - k]


def F_bundle(cand: BundleCandidate, prob: BundleProblem,
             lam_iv: Interval | None = None):
    """Rigorous residual: the phase slot and both sequence components on
    modes [-(M+2), M+2] (the full support of the truncated image).

    Returns (phase: ComplexInterval, r1: CIArr, r2: CIArr).
    """
    M = cand.M
    lam = Interval.point(cand.lam) if lam_iv is None else lam_iv
    v1 = CIArr.point(np.pad(cand.v1, 2))
    v2 = CIArr.point(np.pad(cand.v2, 2))
    ms = np.arange(-(M + 2), M + 3)
    Lfac = CIArr(RIArr.from_interval(lam, ms.shape), RIArr.point(ms.astype(float)))
    phase_re = RIArr(cand.v1.real, cand.v1.real).sum_interval() - Interval.point(prob.l)
    phase_im = RIArr(cand.v1.imag, cand.v1.imag).sum_interval()
    gv = _gamma_conv_interval(CIArr.point(cand.v1), M + 2)
    r1 = Lfac * v1 - v2
    r2 = Lfac * v2 + prob.a * v1 - prob.b * gv
    return ComplexInterval(phase_re, phase_im), r1, r2


def _space(prob: BundleProblem, M: int) -> SpaceSpec:
    return SpaceSpec((CompSpec("fourier", prob.nu, M),
                      CompSpec("fourier", prob.nu, M)), has_param=True)


def DF_bundle_interval(cand: BundleCandidate, prob: BundleProblem,
                       M_cols: int) -> CIArr:
    """Interval derivative matrix, rows on the candidate window, columns
    extended to modes [-M_cols, M_cols] per component."""
    M = cand.M
    K, KC = 2 * M + 1, 2 * M_cols + 1
    n_rows, n_cols = 1 + 2 * K, 1 + 2 * KC
    out = CIArr.zeros((n_rows, n_cols))
    ms = np.arange(-M, M + 1)
    # phase row over v1 columns |m'| <= M
    out[0, 1 + (M_cols - M):1 + (M_cols + M) + 1] = np.ones(K, dtype=complex)
    # lambda column
    out.re.lo[1:1 + K, 0] = cand.v1.real
    out.re.hi[1:1 + K, 0] = cand.v1.real
    out.im.lo[1:1 + K, 0] = cand.v1.imag
    out.im.hi[1:1 + K, 0] = cand.v1.imag
    out.re.lo[1 + K:, 0] = cand.v2.real
    out.re.hi[1 + K:, 0] = cand.v2.real
    out.im.lo[1 + K:, 0] = cand.v2.imag
    out.im.hi[1 + K:, 0] = cand.v2.imag
    a, b = prob.a, prob.b
    for i, m in enumerate(ms):
        j = m + M_cols
        diag = ComplexInterval(Interval.point(cand.lam), Interval.point(float(m)))
        out[1 + i, 1 + j] = diag                              # L on comp 1
        out[1 + K + i, 1 + KC + j] = diag                     # L on comp 2
        out[1 + i, 1 + KC + j] = ComplexInterval(Interval(-1.0), Interval(0.0))
        out[1 + K + i, 1 + j] = ComplexInterval(a, Interval(0.0))
        for mb in (m - 2, m + 2):
            jb = mb + M_cols
            if 0 <= jb < KC:
                prev = out[1 + K + i, 1 + jb]
                out[1 + K + i, 1 + jb] = prev - ComplexInterval(b * 0.5, Interval(0.0))
    return out


# ---------------------------------------------------------------------
# bounds
# ---------------------------------------------------------------------

def _xnorm_vec(phase_mag: float, r1: CIArr, r2: CIArr, nu: float) -> float:
    """Product-space norm upper bound of a residual triple."""
    M = (r1.shape[-1] - 1) // 2
    p = weight_powers(nu, M)
    w = p.hi[np.abs(np.arange(-M, M + 1))]
    from .ivarrays import dot_upper
    return max(phase_mag,
               float(dot_upper(w, r1.mag_upper())),
               float(dot_upper(w, r2.mag_upper())))


def bound_Y_bundle(cand: BundleCandidate, Af: np.ndarray, prob: BundleProblem):
    """||A_f F|| plus the diagonally inverted near-tail of the residual."""
    M = cand.M
    K = 2 * M + 1
    phase, r1, r2 = F_bundle(cand, prob)
    inner = CIArr.zeros(1 + 2 * K)
    inner[0] = phase
    inner[1:1 + K] = r1[2:2 + K]
    inner[1 + K:] = r2[2:2 + K]
    Av = (CIMat.point(Af) @ CIMat.from_ci(_as_col(inner))).to_ci()
    Av = CIArr(RIArr(Av.re.lo[:, 0], Av.re.hi[:, 0]), RIArr(Av.im.lo[:, 0], Av.im.hi[:, 0]))
    Y1 = _xnorm_vec(float(Av.mag_upper()[0]), Av[1:1 + K], Av[1 + K:], prob.nu)
    # tail part: modes M+1, M+2 divided by (i m + lambda_bar)
    ms = np.arange(-(M + 2), M + 3)
    sel = np.abs(ms) > M
    wp = weight_powers(prob.nu, M + 2)
    tails = []
    for r in (r1, r2):
        acc = Interval(0.0)
        for i in np.nonzero(sel)[0]:
            den = ComplexInterval(Interval.point(cand.lam), Interval.point(float(ms[i])))
            val = r.interval(int(i)) / den
            acc = acc + Interval(0.0, val.mag_upper()) * wp.interval(abs(int(ms[i])))
        tails.append(acc.hi)
    Y2 = max(tails)
    return Y1 + Y2, Y1, Y2


def _as_col(v: CIArr) -> CIArr:
    return CIArr(RIArr(v.re.lo[:, None], v.re.hi[:, None]),
                 RIArr(v.im.lo[:, None], v.im.hi[:, None]))


def bound_Z1_bundle(cand: BundleCandidate, Af: np.ndarray, prob: BundleProblem):
    """Finite defect over columns up to 2M plus the closed-form tail."""
    M = cand.M
    M2 = 2 * M
    K, K2 = 2 * M + 1, 2 * M2 + 1
    DFe = DF_bundle_interval(cand, prob, M2)
    prod = CIMat.point(Af) @ CIMat.from_ci(DFe)
    # identity part: param plus modes |m'| <= M of each component
    n_rows = 1 + 2 * K
    ident = np.zeros((n_rows, 1 + 2 * K2))
    ident[0, 0] = 1.0
    for i in range(K):
        ident[1 + i, 1 + (M2 - M) + i] = 1.0
        ident[1 + K + i, 1 + K2 + (M2 - M) + i] = 1.0
    diff = CIMat.point(ident) - prod
    fin = block_opnorm_upper(diff.mag_upper(), _space(prob, M), _space(prob, M2))
    lam_iv = Interval.point(cand.lam)
    tail_op = tail_norm_bounds("floquet", lam=lam_iv, M=M)
    nu2 = Interval.point(prob.nu).sq()
    fmax = max(1.0, (prob.a.abs() + prob.b.abs() * nu2).hi)
    tail = (tail_op * fmax).hi
    return fin + tail, fin, tail


def bound_Z2_bundle(Af: np.ndarray, lam: float, M: int, prob: BundleProblem):
    """Radius-independent Lipschitz bound 2 max(||A_f||, tail)."""
    Af_norm = block_opnorm_upper(np.abs(Af), _space(prob, M), _space(prob, M))
    tail_op = tail_norm_bounds("floquet", lam=Interval.point(lam), M=M).hi
    return (2.0 * Interval.point(max(Af_norm, tail_op))).hi, Af_norm


def validate_bundle(cand: BundleCandidate, prob: BundleProblem) -> BundleCertificate:
    """Y/Z1/Z2 plus the radii engine; a proved verdict also pins the
    exponent interval strictly below zero."""
    cand.check()
    if cand.M != prob.M:
        raise ValueError(f"candidate window {cand.M} != problem window {prob.M}")
    DF_float = numerics.bundle_DF(prob.a.mid, prob.b.mid, cand.lam, cand.v1, cand.v2)
    Af = numerics.approx_inverse(DF_float)
    Y, Y1, Y2 = bound_Y_bundle(cand, Af, prob)
    Z1, Z1_fin, Z1_tail = bound_Z1_bundle(cand, Af, prob)
    Z2, Af_norm = bound_Z2_bundle(Af, cand.lam, prob.M, prob)
    res = radii_from_bounds(KBounds(Y=Y, Z1=Z1, Z2=Z2))
    if not res.feasible:
        verdict = f"failed: {res.reason}"
        r_F = float("nan")
        lam_iv = Interval.point(cand.lam)
    else:
        r_F = res.r_min
        lam_iv = Interval(cand.lam - r_F, cand.lam + r_F)
        if not (lam_iv.hi < 0.0):
            verdict = "failed: validated exponent interval touches zero"
        elif Z1 >= 1.0 - MARGINAL_GAP:
            verdict = "proved (marginal)"
        else:
            verdict = "proved"
    return BundleCertificate(
        verdict=verdict, Y=Y, Z1=Z1, Z2=Z2, r_F=r_F, lam=cand.lam,
        lam_interval=lam_iv, Af_norm=Af_norm, Z1_finite=Z1_fin, Z1_tail=Z1_tail,
        problem=prob, candidate=cand, Af=Af)
