"""Stage 2: rigorous Taylor-Fourier parameterization of the local
stable manifold attached to the lattice periodic orbit.

The chart W(theta, sigma) solves the invariance equation with linear
internal dynamics theta' = 1, sigma' = lambda sigma; its coefficients
satisfy per-order systems pinned at order 0 to the orbit and at order 1
to the validated bundle. The exponent is known only inside the stage-1
interval, so every bound here evaluates lambda as that interval. The
certificate carries the chart coefficients, the C0 error radius r_TF,
and rigorous sigma-derivative enclosures for the connecting stage.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import numerics
from .bundle import BundleCertificate
from .certify import KBounds, radii_from_bounds
from .intervals import ComplexInterval, Interval, expi_interval
from .ivarrays import CIArr, CIMat, RIArr, RIMat, conv2c, dot_upper
from .operators import tail_norm_bounds
from .seqspace import weight_powers

__all__ = ["ManifoldProblem", "ManifoldCandidate", "ManifoldCertificate",
           "homological_recursion", "F_manifold_residual", "bound_Y_manifold",
           "bound_Z1_manifold", "bound_Z2_manifold", "validate_manifold",
           "eval_W_rigorous"]


@dataclass(frozen=True)
class ManifoldProblem:
    a: Interval
    b: Interval
    c: Interval
    nu: float
    N: int
    M: int
    bundle: BundleCertificate
    r_star: float = 1e-3

    def __post_init__(self):
        if self.N < 2:
            raise ValueError("N must be >= 2")
        if not self.bundle.proved:
            raise ValueError("bundle certificate must be proved")
        if self.bundle.candidate.M != self.M:
            raise ValueError("mode windows of bundle and manifold must agree")

    @property
    def lam_iv(self) -> Interval:
        return self.bundle.lam_interval


@dataclass
class ManifoldCandidate:
    w1: np.ndarray          # (N+1, 2M+1) complex, order 0 zero, order 1 = bundle
    w2: np.ndarray

    @property
    def N(self) -> int:
        return self.w1.shape[0] - 1

    @property
    def M(self) -> int:
        return (self.w1.shape[1] - 1) // 2

    def check(self, prob: ManifoldProblem):
        if np.any(self.w1[0]) or np.any(self.w2[0]):
            raise ValueError("order 0 must vanish in components 1 and 2")
        if not (np.array_equal(self.w1[1], prob.bundle.candidate.v1)
                and np.array_equal(self.w2[1], prob.bundle.candidate.v2)):
            raise ValueError("order 1 must equal the validated bundle direction")
        for n in range(self.N + 1):
            if not (np.array_equal(self.w1[n], np.conj(self.w1[n][::-1]))
                    and np.array_equal(self.w2[n], np.conj(self.w2[n][::-1]))):
                raise ValueError(f"order {n} violates conjugate symmetry")


@dataclass
class ManifoldCertificate:
    verdict: str
    Y: float
    Z1: float
    Z2: float
    r_TF: float
    Z1_finite: float
    Z1_tail: float
    Af_norm: float
    w1_norm: float          # ||w1||_TF upper bound, cached for stage 3
    q_norm: float           # ||w1 * w1||_TF upper bound
    problem: ManifoldProblem
    candidate: ManifoldCandidate

    @property
    def proved(self) -> bool:
        return self.verdict.startswith("proved")

    @property
    def lam_iv(self) -> Interval:
        return self.problem.lam_iv

    def to_json(self) -> dict:
        p = self.problem
        return {
            "stage": "manifold",
            "params": {"a": p.a.to_hex(), "b": p.b.to_hex(), "c": p.c.to_hex()},
            "N": p.N,
            "M": p.M,
            "nu": p.nu.hex(),
            "r_star": p.r_star.hex(),
            "Y_hex": self.Y.hex(),
            "Z1_hex": self.Z1.hex(),
            "Z2_hex": self.Z2.hex(),
            "r_hex": self.r_TF.hex(),
            "w1_norm_hex": self.w1_norm.hex(),
            "q_norm_hex": self.q_norm.hex(),
            "verdict": self.verdict,
        }


def homological_recursion(prob: ManifoldProblem, N: int | None = None) -> ManifoldCandidate:
    """Float per-order solves seeded by the validated bundle, then a
    Newton pass over the truncated system (a no-op at the solved point)."""
    N = prob.N if N is None else N
    bc = prob.bundle.candidate
    w1, w2 = numerics.homological_recursion(
        prob.a.mid, prob.b.mid, prob.c.mid, bc.lam, bc.v1, bc.v2, N)
    return ManifoldCandidate(w1=w1, w2=w2)


# ---------------------------------------------------------------------
# rigorous residual
# ---------------------------------------------------------------------

def _tf_point(arr: np.ndarray) -> CIArr:
    return CIArr.point(arr)


def _lam_factor_grid(lam: Interval, N_rows: int, M_cols: int,
                     n_lo: int = 0) -> CIArr:
    """Grid of (i m + n lambda) over orders n_lo..N_rows, modes
    [-M_cols, M_cols] as a complex interval array."""
    ns = np.arange(n_lo, N_rows + 1, dtype=float)[:, None]
    ms = np.arange(-M_cols, M_cols + 1, dtype=float)[None, :]
    re = RIArr(np.nextafter(ns * lam.lo, -np.inf) * np.ones_like(ms),
               np.nextafter(ns * lam.hi, np.inf) * np.ones_like(ms))
    re = RIArr(np.minimum(re.lo, re.hi), np.maximum(re.lo, re.hi))
    im = RIArr(ms * np.ones_like(ns), ms * np.ones_like(ns))
    return CIArr(re, im)


def F_manifold_residual(cand: ManifoldCandidate, prob: ManifoldProblem,
                        q_iv: CIArr | None = None):
    """Rigorous residual rows 2..3N over modes [-3M, 3M] (components 1
    and 2), with the exponent as the stage-1 interval.

    Order rows 0 and 1 are handled analytically by the Y bound (their
    residual is the bundle enclosure defect, size r_F). Also returns the
    enclosed square q = w1 * w1 for reuse.
    """
    N, M = cand.N, cand.M
    lam = prob.lam_iv
    w1 = _tf_point(cand.w1)
    w2 = _tf_point(cand.w2)
    if q_iv is None:
        q_iv = conv2c(w1, w1)                       # (2N+1, 4M+1)
    cub = conv2c(CIArr(q_iv.re, q_iv.im), w1)       # (3N+1, 6M+1)

    K3 = 6 * M + 1
    r1 = CIArr.zeros((3 * N + 1, K3))
    r2 = CIArr.zeros((3 * N + 1, K3))
    # rows 2..N carry the stored coefficients
    sl = slice(3 * M - M, 3 * M + M + 1)
    lf = _lam_factor_grid(lam, N, M, n_lo=0)
    w1e = CIArr.zeros((N + 1, K3))
    w2e = CIArr.zeros((N + 1, K3))
    w1e[:, sl] = w1
    w2e[:, sl] = w2
    lfe = CIArr.zeros((N + 1, K3))
    lfe[:, sl] = lf
    t1 = lfe * w1e - w2e
    t2 = lfe * w2e + prob.a * w1e
    # potential band: conv of each order with the cos(2 theta) sequence
    from .bundle import _gamma_conv_interval
    for n in range(2, N + 1):
        gv = _gamma_conv_interval(w1[n], 3 * M)
        row2 = t2[n] - prob.b * gv
        r1[n] = t1[n]
        r2[n] = row2
    # cubic forcing on every row n >= 2 (beyond N it is the whole row)
    for n in range(2, 3 * N + 1):
        r2[n] = r2[n] - prob.c * cub[n]
    return r1, r2, q_iv


# ---------------------------------------------------------------------
# preconditioner (float, block lower triangular in the Taylor order)
# ---------------------------------------------------------------------

def _af_blocks(prob: ManifoldProblem, cand: ManifoldCandidate):
    """Numerical inverse of the truncated derivative via block forward
    substitution; identity rows on orders 0, 1."""
    a, b, c = prob.a.mid, prob.b.mid, prob.c.mid
    lam = prob.bundle.candidate.lam
    N, M = cand.N, cand.M
    K = 2 * M + 1
    KK = 2 * K
    ms = np.arange(-M, M + 1)
    G = numerics.gamma3_band(M, M)
    qf = np.zeros((N + 1, 4 * M + 1), dtype=complex)
    for n in range(2, N + 1):
        qf[n] = sum(np.convolve(cand.w1[l1], cand.w1[n - l1]) for l1 in range(1, n))

    def conv_mat(kern):
        A = np.zeros((K, K), dtype=complex)
        for i, mr in enumerate(ms):
            lo = max(-M, mr - 2 * M)
            hi = min(M, mr + 2 * M)
            cols = np.arange(lo, hi + 1)
            A[i, cols + M] = kern[(mr - cols) + 2 * M]
        return A

    Dinv = []
    for n in range(N + 1):
        if n <= 1:
            Dinv.append(np.eye(KK, dtype=complex))
            continue
        Dn = np.diag(1j * ms + n * lam)
        blk = np.block([[Dn, -np.eye(K)], [a * np.eye(K) - b * G, Dn]])
        Dinv.append(np.linalg.inv(blk))
    Qb = {}
    for l in range(2, N + 1):
        B = np.zeros((KK, KK), dtype=complex)
        B[K:, :K] = -3.0 * c * conv_mat(qf[l])
        Qb[l] = B
    blocks = [[None] * (N + 1) for _ in range(N + 1)]
    for n in range(N + 1):
        blocks[n][n] = Dinv[n]
    for nc in range(N + 1):
        for n in range(nc + 1, N + 1):
            if n < 2:
                continue
            S = None
            for kk in range(nc, n):
                l = n - kk
                if l >= 2 and blocks[kk][nc] is not None:
                    t = Qb[l] @ blocks[kk][nc]
                    S = t if S is None else S + t
            if S is not None:
                blocks[n][nc] = -Dinv[n] @ S
    nrow = (N + 1) * KK
    Af = np.zeros((nrow, nrow), dtype=complex)
    for n in range(N + 1):
        for nc in range(n + 1):
            if blocks[n][nc] is not None:
                Af[n * KK:(n + 1) * KK, nc * KK:(nc + 1) * KK] = blocks[n][nc]
    return Af


def _tf_weights(prob: ManifoldProblem, N: int, M: int):
    """Row weights and component labels for the order-major layout
    [n][comp][mode]."""
    p = weight_powers(prob.nu, M)
    w1 = p.hi[np.abs(np.arange(-M, M + 1))]
    K = 2 * M + 1
    nrow = (N + 1) * 2 * K
    w = np.empty(nrow)
    comp = np.empty(nrow, dtype=int)
    for n in range(N + 1):
        w[n * 2 * K:n * 2 * K + K] = w1
        comp[n * 2 * K:n * 2 * K + K] = 1
        w[n * 2 * K + K:(n + 1) * 2 * K] = w1
        comp[n * 2 * K + K:(n + 1) * 2 * K] = 2
    return w, comp


def _af_norm_upper(Af: np.ndarray, prob: ManifoldProblem, N: int, M: int) -> float:
    w, comp = _tf_weights(prob, N, M)
    p_lo = weight_powers(prob.nu, M)
    w_in_lo = p_lo.lo[np.abs(np.arange(-M, M + 1))]
    absA = np.abs(Af)
    s1 = dot_upper((w * (comp == 1))[:, None], absA, axis=0)
    s2 = dot_upper((w * (comp == 2))[:, None], absA, axis=0)
    K = 2 * M + 1
    best = []
    for s in (s1, s2):
        b11 = b12 = 0.0
        for n in range(N + 1):
            b11 = max(b11, np.max(s[n * 2 * K:n * 2 * K + K] / w_in_lo))
            b12 = max(b12, np.max(s[n * 2 * K + K:(n + 1) * 2 * K] / w_in_lo))
        best.append((b11 + b12) * (1 + 2 ** -48))
    return max(best)


def _xnorm_tf(vmag: np.ndarray, prob: ManifoldProblem, N: int, M: int) -> float:
    w, comp = _tf_weights(prob, N, M)
    return max(float(dot_upper(w * (comp == 1), vmag)),
               float(dot_upper(w * (comp == 2), vmag)))


# ---------------------------------------------------------------------
# bounds
# ---------------------------------------------------------------------

def bound_Y_manifold(cand: ManifoldCandidate, Af: np.ndarray,
                     prob: ManifoldProblem, residual=None):
    """Bundle-enclosure defect terms plus the preconditioned inner
    residual plus the diagonally inverted tails."""
    N, M = cand.N, cand.M
    K = 2 * M + 1
    r_F = prob.bundle.r_F
    Af_norm = _af_norm_upper(Af, prob, N, M)
    r1, r2, q_iv = residual if residual is not None else \
        F_manifold_residual(cand, prob)
    # inner part through A_f
    sl = slice(3 * M - M, 3 * M + M + 1)
    vec = CIArr.zeros((N + 1) * 2 * K)
    for n in range(2, N + 1):
        vec[n * 2 * K:n * 2 * K + K] = r1[n][sl]
        vec[n * 2 * K + K:(n + 1) * 2 * K] = r2[n][sl]
    col = CIArr(RIArr(vec.re.lo[:, None], vec.re.hi[:, None]),
                RIArr(vec.im.lo[:, None], vec.im.hi[:, None]))
    Av = (CIMat.point(Af) @ CIMat.from_ci(col)).to_ci()
    Y2 = _xnorm_tf(Av.mag_upper()[:, 0], prob, N, M)
    # tails with the interval exponent
    lam = prob.lam_iv
    p3 = weight_powers(prob.nu, 3 * M)
    w3 = p3.hi[np.abs(np.arange(-3 * M, 3 * M + 1))]
    mig = _cmig_grid(lam, 3 * N, 3 * M)
    Y4 = 0.0   # Taylor tail: orders N+1..3N, all stored modes
    Y5 = 0.0   # mode tail: orders 2..N, modes (M, 3M]
    ms3 = np.abs(np.arange(-3 * M, 3 * M + 1))
    mode_tail_sel = ms3 > M
    for comp_r in (r1, r2):
        mag = comp_r.mag_upper()
        t4 = 0.0
        for n in range(N + 1, 3 * N + 1):
            t4 += float(dot_upper(w3, mag[n] / np.maximum(mig[n], 1e-300)))
        t5 = 0.0
        for n in range(2, N + 1):
            t5 += float(dot_upper(w3[mode_tail_sel],
                                  (mag[n] / np.maximum(mig[n], 1e-300))[mode_tail_sel]))
        Y4 = max(Y4, t4)
        Y5 = max(Y5, t5)
    rF_iv = Interval.point(r_F)
    total = (rF_iv * Af_norm + Interval.point(Y2) + rF_iv
             + Interval.point(Y4) + Interval.point(Y5)).hi
    return total, {"af_part": (rF_iv * Af_norm).hi, "inner": Y2, "defect": r_F,
                   "taylor_tail": Y4, "mode_tail": Y5}, q_iv, Af_norm


def _cmig_grid(lam: Interval, N_rows: int, M_cols: int) -> np.ndarray:
    """Lower bounds of |i m + n lambda| on the order/mode grid (rows
    0..N_rows), with rows 0, 1 set to 1 (identity rows)."""
    ns = np.arange(0, N_rows + 1, dtype=float)[:, None]
    ms = np.arange(-M_cols, M_cols + 1, dtype=float)[None, :]
    lam_mig = lam.mig()
    re2 = np.maximum(np.nextafter((ns * lam_mig) ** 2, -np.inf), 0.0)
    out = np.nextafter(np.sqrt(np.maximum(np.nextafter(re2 + ms * ms, -np.inf), 0.0)), -np.inf)
    out[0, :] = 1.0
    out[1, :] = 1.0
    return np.maximum(out, 0.0)


def bound_Z1_manifold(cand: ManifoldCandidate, Af: np.ndarray,
                      prob: ManifoldProblem, q_iv: CIArr):
    """Streamed finite defect over input orders 0..N and modes up to 3M,
    plus the closed-form tails times the derivative norm bound."""
    N, M = cand.N, cand.M
    K = 2 * M + 1
    KK = 2 * K
    nrow = (N + 1) * KK
    lam = prob.lam_iv
    K3 = 6 * M + 1
    ms3 = np.arange(-3 * M, 3 * M + 1)
    w_out, comp_out = _tf_weights(prob, N, M)
    p3 = weight_powers(prob.nu, 3 * M)
    w_in_lo = p3.lo[np.abs(ms3)]
    Af4 = Af.reshape(nrow, N + 1, 2, K)

    # per-l interval convolution kernels (-3c) q_l as CIMat rows
    c3 = -3.0 * prob.c
    B = np.zeros((2, 2))   # [out_comp-1, in_comp-1] block maxima
    w1_rows = {1: (w_out * (comp_out == 1)), 2: (w_out * (comp_out == 2))}

    for nprime in range(N + 1):
        C = CIArr.zeros((nrow, 2, K3))
        if nprime <= 1:
            for j in range(2):
                base = CIArr.point(Af4[:, nprime, j, :])
                C[:, j, 3 * M - M:3 * M + M + 1] = base
        else:
            lf_row = _lam_factor_grid(lam, nprime, M, n_lo=nprime)
            for j in range(2):
                block = CIArr.point(Af4[:, nprime, j, :])
                C[:, j, 3 * M - M:3 * M + M + 1] = block * lf_row[0]
            comp1 = CIArr.point(Af4[:, nprime, 0, :])
            comp2 = CIArr.point(Af4[:, nprime, 1, :])
            cur = C[:, 1, 3 * M - M:3 * M + M + 1]
            C[:, 1, 3 * M - M:3 * M + M + 1] = cur - comp1
            cur = C[:, 0, 3 * M - M:3 * M + M + 1]
            C[:, 0, 3 * M - M:3 * M + M + 1] = cur + comp2 * prob.a
            # potential band: -b * (columns of A_f at modes m' -+ 2)
            band = CIArr.zeros((nrow, K3))
            for shift in (-2, 2):
                lo = 3 * M - M + shift
                seg = band[:, lo + 0:lo + K]
                band[:, lo:lo + K] = seg + comp2 * 0.5
            cur = C[:, 0, :]
            C[:, 0, :] = cur - band * prob.b
        # cubic block: stacked matmul over l >= 2
        lmax = N - nprime
        if lmax >= 2:
            nl = lmax - 1
            Astack = np.ascontiguousarray(
                Af4[:, nprime + 2:nprime + lmax + 1, 1, :].reshape(nrow, nl * K))
            Bstack = CIArr.zeros((nl * K, K3))
            for idx_l, l in enumerate(range(2, lmax + 1)):
                kern = q_iv[l]  # modes [-2M, 2M]
                for i, mr in enumerate(np.arange(-M, M + 1)):
                    colA = mr - 2 * M + 3 * M
                    colB = mr + 2 * M + 3 * M
                    Bstack[idx_l * K + i, colA:colB + 1] = \
                        CIArr(RIArr(kern.re.lo[::-1], kern.re.hi[::-1]),
                              RIArr(kern.im.lo[::-1], kern.im.hi[::-1]))
            prod = (CIMat.point(Astack) @ CIMat.from_ci(Bstack)).to_ci()
            cur = C[:, 0, :]
            C[:, 0, :] = cur + CIArr(prod.re, prod.im) * c3
        # identity minus the accumulated product
        mag = C.mag_upper()
        idx_rows_1 = nprime * KK + np.arange(K)
        idx_rows_2 = nprime * KK + K + np.arange(K)
        ident = np.zeros((nrow, 2, K3))
        ident[idx_rows_1, 0, 3 * M - M + np.arange(K)] = 1.0
        ident[idx_rows_2, 1, 3 * M - M + np.arange(K)] = 1.0
        # |ident - C| <= ident-adjusted magnitude
        adj = _ident_adjust(mag, C, ident)
        for j in range(2):
            s1 = dot_upper(w1_rows[1][:, None], adj[:, j, :], axis=0)
            s2 = dot_upper(w1_rows[2][:, None], adj[:, j, :], axis=0)
            B[0, j] = max(B[0, j], float(np.max(s1 / w_in_lo)))
            B[1, j] = max(B[1, j], float(np.max(s2 / w_in_lo)))
    fin = max(B[0, 0] + B[0, 1], B[1, 0] + B[1, 1]) * (1 + 2 ** -48)

    tail_f = tail_norm_bounds("manifold-fourier", lam=lam, M=M)
    tail_t = tail_norm_bounds("manifold-taylor", lam=lam, N=N)
    q_norm = _tf_norm_upper(q_iv, prob.nu)
    nu2 = Interval.point(prob.nu).sq()
    fmax_iv = prob.a.abs() + prob.b.abs() * nu2 + 3.0 * prob.c.abs() * q_norm
    fmax = max(1.0, fmax_iv.hi)
    tail = ((tail_f + tail_t) * fmax).hi
    return fin + tail, fin, tail, q_norm


def _ident_adjust(mag: np.ndarray, C: CIArr, ident: np.ndarray) -> np.ndarray:
    """Magnitude upper bounds of (ident - C) given |C| bounds: replace
    the entries where ident is 1 by |1 - C| enclosures."""
    out = mag.copy()
    rows, jcols, mcols = np.nonzero(ident)
    re_lo = C.re.lo[rows, jcols, mcols]
    re_hi = C.re.hi[rows, jcols, mcols]
    im_lo = C.im.lo[rows, jcols, mcols]
    im_hi = C.im.hi[rows, jcols, mcols]
    dre = np.maximum(np.abs(1.0 - re_lo), np.abs(1.0 - re_hi))
    dim = np.maximum(np.abs(im_lo), np.abs(im_hi))
    out[rows, jcols, mcols] = np.nextafter(
        np.sqrt(np.nextafter(np.nextafter(dre * dre, np.inf)
                             + np.nextafter(dim * dim, np.inf), np.inf)), np.inf)
    return out


def _tf_norm_upper(arr: CIArr, nu: float) -> Interval:
    """TF norm (sum over orders of weighted mode-sums) of an order/mode
    grid, as an interval upper bound."""
    M = (arr.shape[-1] - 1) // 2
    p = weight_powers(nu, M)
    w = p.hi[np.abs(np.arange(-M, M + 1))]
    total = 0.0
    for n in range(arr.shape[0]):
        total += float(dot_upper(w, arr.mag_upper()[n]))
    total *= (1 + arr.shape[0] * 2 ** -50)
    return Interval(0.0, total)


def bound_Z2_manifold(Af_norm: float, prob: ManifoldProblem,
                      w1_norm: Interval, r_star: float) -> float:
    lam = prob.lam_iv
    tail_f = tail_norm_bounds("manifold-fourier", lam=lam, M=prob.M)
    tail_t = tail_norm_bounds("manifold-taylor", lam=lam, N=prob.N)
    pieces = Interval.point(Af_norm) + tail_f + tail_t
    out = 3.0 * prob.c.abs() * pieces * (2.0 * w1_norm + Interval.point(r_star))
    return out.hi


def validate_manifold(cand: ManifoldCandidate, prob: ManifoldProblem,
                      r_star: float | None = None) -> ManifoldCertificate:
    cand.check(prob)
    r_star = prob.r_star if r_star is None else r_star
    Af = _af_blocks(prob, cand)
    residual = F_manifold_residual(cand, prob)
    Y, y_parts, q_iv, Af_norm = bound_Y_manifold(cand, Af, prob, residual)
    Z1, Z1_fin, Z1_tail, q_norm = bound_Z1_manifold(cand, Af, prob, q_iv)
    w1_norm = _tf_norm_upper(_tf_point_arr(cand.w1), prob.nu)
    Z2 = bound_Z2_manifold(Af_norm, prob, w1_norm, r_star)
    res = radii_from_bounds(KBounds(Y=Y, Z1=Z1, Z2=Z2, r_star=r_star))
    if not res.feasible:
        verdict = f"failed: {res.reason}"
        r_TF = float("nan")
    elif res.r_min > r_star:
        verdict = (f"failed: contraction radius {res.r_min} exceeds the "
                   f"Lipschitz ball r* = {r_star} (increase r_star)")
        r_TF = res.r_min
    else:
        verdict = "proved"
        r_TF = res.r_min
    return ManifoldCertificate(
        verdict=verdict, Y=Y, Z1=Z1, Z2=Z2, r_TF=r_TF,
        Z1_finite=Z1_fin, Z1_tail=Z1_tail, Af_norm=Af_norm,
        w1_norm=w1_norm.hi, q_norm=q_norm.hi,
        problem=prob, candidate=cand)


def _tf_point_arr(arr: np.ndarray) -> CIArr:
    return CIArr.point(arr)


# ---------------------------------------------------------------------
# rigorous chart evaluation
# ---------------------------------------------------------------------

def eval_W_rigorous(cert: ManifoldCertificate, theta: Interval, sigma: Interval,
                    deriv: int = 0, include_tail: bool = True):
    """Enclosures of the chart components 1, 2 (or their first or second
    sigma-derivatives) at (theta, sigma).

    include_tail adds the validated remainder: r_TF for deriv 0 (needs
    |sigma| <= 1), r_TF/(1-|sigma|)^2 for deriv 1, and the geometric
    second-derivative tail for deriv 2 (both need |sigma| < 1).
    """
    cand = cert.candidate
    N, M = cand.N, cand.M
    # e^{i m theta} by recurrence; conjugate for negative modes
    e1 = expi_interval(theta)
    pos = [ComplexInterval(Interval(1.0), Interval(0.0))]
    for _ in range(M):
        pos.append(pos[-1] * e1)
    ems = [pos[-m].conj() if m < 0 else pos[m] for m in range(-M, M + 1)]
    ere_lo = np.array([e.re.lo for e in ems]); ere_hi = np.array([e.re.hi for e in ems])
    eim_lo = np.array([e.im.lo for e in ems]); eim_hi = np.array([e.im.hi for e in ems])
    E = CIArr(RIArr(ere_lo, ere_hi), RIArr(eim_lo, eim_hi))

    x = sigma.abs()
    if deriv == 0:
        fac0 = [Interval(1.0)]
        for _ in range(N):
            fac0.append(fac0[-1] * sigma)
        factors = fac0
    else:
        pows = [Interval(1.0)]
        for _ in range(N):
            pows.append(pows[-1] * sigma)
        if deriv == 1:
            factors = [Interval(0.0)] + [float(n) * pows[n - 1] for n in range(1, N + 1)]
        elif deriv == 2:
            factors = [Interval(0.0), Interval(0.0)] + \
                [float(n * (n - 1)) * pows[n - 2] for n in range(2, N + 1)]
        else:
            raise ValueError("deriv in {0, 1, 2}")

    outs = []
    for arr in (cand.w1, cand.w2):
        total = Interval(0.0)
        for n in range(N + 1):
            if deriv >= 1 and n < deriv:
                continue
            prod = CIArr.point(arr[n]) * E
            total = total + prod.re.sum_interval() * factors[n]
        outs.append(total)

    if include_tail:
        r = cert.r_TF
        if deriv == 0:
            if not (x.hi <= 1.0):
                raise ValueError("|sigma| <= 1 required for the chart domain")
            pad = Interval(-r, r)
        else:
            if not (x.hi < 1.0):
                raise ValueError("|sigma| < 1 required for derivative tails")
            one_minus = Interval.point(1.0) - Interval.point(x.hi)
            if deriv == 1:
                t = (Interval.point(r) / one_minus.sq()).hi
            else:
                xs = Interval.point(x.hi)
                t = (Interval.point(r) * ((xs.sq() + xs) / (one_minus * one_minus * one_minus)
                                          + (xs + 2.0) / one_minus.sq())).hi
            pad = Interval(-t, t)
        outs = [o + pad for o in outs]
    return outs[0], outs[1]
