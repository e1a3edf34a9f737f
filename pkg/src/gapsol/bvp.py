"""Stage 3: rigorous Chebyshev solution of the connecting boundary-value
problem, and assembly of the certified soliton profile.

The half-line orbit from an even initial condition to the validated
manifold chart is rescaled to t in [-1, 1] and expanded in Chebyshev
coefficients. Unknowns are (sigma, s1..s4); theta and the half-length
are fixed, with the domain length pinned to theta + k*pi so that the
oscillator components genuinely match the chart at the right endpoint.

The candidate is supported in [0, M_C]; the validation operator may use
a larger window M_v >= M_C, which sharpens both the finite defect and
the tail factor at fixed candidate truncation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import numerics
from .certify import KBounds, radii_from_bounds
from .intervals import ComplexInterval, Interval, PI, exp_interval
from .ivarrays import CIArr, CIMat, RIArr, RIMat, conv2r, dot_upper, rig_matmul
from .manifold import ManifoldCertificate, eval_W_rigorous
from .operators import tail_norm_bounds
from .seqspace import cheb_weights, weight_powers

__all__ = ["BvpProblem", "BvpCandidate", "SolitonCertificate",
           "F_bvp_residual", "bound_Y_bvp", "bound_Z1_bvp", "bound_Z2_bvp",
           "validate_soliton", "assemble_soliton", "compute_candidate"]


@dataclass(frozen=True)
class BvpProblem:
    a: Interval
    b: Interval
    c: Interval
    omega: float
    MC: int                       # candidate truncation
    theta: Interval
    half_periods: int             # L = theta + half_periods * pi
    manifold: ManifoldCertificate
    MV: int | None = None         # validation truncation (>= MC)
    r_star: float = 1e-2

    def __post_init__(self):
        if not self.manifold.proved:
            raise ValueError("manifold certificate must be proved")
        if not (self.omega >= 1.0):
            raise ValueError("omega must be >= 1")
        if self.MV is not None and self.MV < self.MC:
            raise ValueError("validation window must not be smaller than the candidate's")
        if self.half_periods < 1:
            raise ValueError("domain length needs at least one half period")

    @property
    def mv(self) -> int:
        return self.MC if self.MV is None else self.MV

    @property
    def L_iv(self) -> Interval:
        return self.theta + float(self.half_periods) * PI

    @property
    def kappa_iv(self) -> Interval:
        return self.L_iv * 0.5

    @property
    def L(self) -> float:
        return self.L_iv.mid

    @property
    def kappa(self) -> float:
        return self.L / 2.0


@dataclass
class BvpCandidate:
    sigma: float
    s: np.ndarray                 # (4, MC+1) float coefficients

    @property
    def MC(self) -> int:
        return self.s.shape[1] - 1

    def check(self, prob: BvpProblem):
        if not (abs(self.sigma) < 1.0):
            raise ValueError(f"|sigma| = {abs(self.sigma)} must be < 1")
        if self.MC != prob.MC:
            raise ValueError("candidate truncation differs from the problem's")
        if not np.all(np.isfinite(self.s)):
            raise ValueError("non-finite candidate coefficients")


@dataclass
class SolitonCertificate:
    verdict: str
    Y: float
    Z1: float
    Z2: float
    r_C: float
    diagnostics: dict
    problem: BvpProblem
    candidate: BvpCandidate

    @property
    def proved(self) -> bool:
        return self.verdict.startswith("proved")

    def to_json(self) -> dict:
        p = self.problem
        return {
            "stage": "soliton",
            "params": {"a": p.a.to_hex(), "b": p.b.to_hex(), "c": p.c.to_hex()},
            "M_C": p.MC,
            "M_V": p.mv,
            "omega": p.omega.hex(),
            "theta": p.theta.to_hex(),
            "half_periods": p.half_periods,
            "sigma_bar_hex": self.candidate.sigma.hex(),
            "Y_hex": self.Y.hex(),
            "Z1_hex": self.Z1.hex(),
            "Z2_hex": self.Z2.hex(),
            "r_hex": self.r_C.hex(),
            "verdict": self.verdict,
        }


def compute_candidate(prob: BvpProblem, sigma0: float | None = None,
                      sigma_scan=(0.02, 0.985, 60)) -> BvpCandidate:
    """Shooting scan for the connection parameter (largest admissible
    root by default), backward-orbit Chebyshev seed, Newton refinement."""
    mc = prob.manifold.candidate
    a, b, c = prob.a.mid, prob.b.mid, prob.c.mid
    th, L = prob.theta.mid, prob.L
    if sigma0 is None:
        roots = numerics.shooting_scan(a, b, c, mc.w1, mc.w2, th, L,
                                       sigma_lo=sigma_scan[0], sigma_hi=sigma_scan[1],
                                       npoints=sigma_scan[2])
        roots = [r for r in roots if abs(r) + prob.r_star < 1.0]
        if not roots:
            raise numerics.SeedRejected(
                "no admissible connection parameter found in the scan window")
        sigma0 = roots[-1]
    sg, s = numerics.bvp_seed(a, b, c, mc.w1, mc.w2, th, L, sigma0, prob.MC)
    sg, s, res = numerics.newton_refine_bvp(a, b, c, prob.kappa, sg, s,
                                            mc.w1, mc.w2, th, prob.omega)
    return BvpCandidate(sigma=sg, s=s)


# ---------------------------------------------------------------------
# rigorous residual
# ---------------------------------------------------------------------

def _cconv_iv(p: RIArr, q: RIArr) -> RIArr:
    """One-sided reflected Chebyshev convolution of interval arrays."""
    a = RIArr(np.concatenate([p.lo[:0:-1], p.lo]), np.concatenate([p.hi[:0:-1], p.hi]))
    b = RIArr(np.concatenate([q.lo[:0:-1], q.lo]), np.concatenate([q.hi[:0:-1], q.hi]))
    full = conv2r(RIArr(a.lo[None, :], a.hi[None, :]), RIArr(b.lo[None, :], b.hi[None, :]))
    n0 = (p.shape[-1] - 1) + (q.shape[-1] - 1)
    return RIArr(full.lo[0, n0:], full.hi[0, n0:])


def _eval_pm_iv(sv: RIArr, sign: int) -> Interval:
    signs = np.ones(sv.shape[-1])
    if sign < 0:
        signs[1::2] = -1.0
    signs[1:] *= 2.0
    return (sv * signs).sum_interval()


def F_bvp_residual(cand: BvpCandidate, prob: BvpProblem, W_enc=None):
    """Rigorous residual on the validation window: the parameter slot,
    the boundary rows (zeroth coefficients, with the chart enclosed as
    the manifold certificate dictates), and rows 1..3*MV+1.

    Returns (param: Interval, rows: RIArr(4, 3*MV+2), W_enc).
    """
    MV = prob.mv
    MM = 3 * MV + 1
    kap = prob.kappa_iv
    s = [RIArr.point(np.pad(cand.s[i], (0, MV - cand.MC))) for i in range(4)]

    def pad(p: RIArr) -> RIArr:
        out = RIArr.zeros(MM + 1)
        n = min(p.shape[-1], MM + 1)
        out[0:n] = RIArr(p.lo[:n], p.hi[:n])
        return out

    s31 = _cconv_iv(s[2], s[0])
    cub = _cconv_iv(_cconv_iv(s[0], s[0]), s[0])
    fs = [pad(s[1]),
          pad(s31) * prob.b - pad(s[0]) * prob.a + pad(cub) * prob.c,
          pad(s[3]),
          pad(s[2]) * (-4.0)]
    mm = np.arange(MM + 1, dtype=float)
    rows = RIArr.zeros((4, MM + 1))
    for i in range(4):
        sv = pad(s[i])
        Ls = sv * (2.0 * mm)
        Ls[0] = 0.0
        Tf = RIArr.zeros(MM + 1)
        Tf[1:MM] = RIArr(fs[i].lo[2:MM + 1], fs[i].hi[2:MM + 1]) - \
            RIArr(fs[i].lo[0:MM - 1], fs[i].hi[0:MM - 1])
        Tf[MM] = Interval(0.0) - fs[i].interval(MM - 1)
        row = Ls + Tf * kap
        rows[i] = row
    if W_enc is None:
        W_enc = eval_W_rigorous(prob.manifold, prob.theta,
                                Interval.point(cand.sigma), deriv=0)
    W1e, W2e = W_enc
    rows[0, 0] = _eval_pm_iv(s[0], +1) - W1e
    rows[1, 0] = _eval_pm_iv(s[1], +1) - W2e
    rows[2, 0] = _eval_pm_iv(s[2], -1) - 1.0
    rows[3, 0] = _eval_pm_iv(s[3], -1)
    param = _eval_pm_iv(s[1], -1)
    return param, rows, W_enc


# ---------------------------------------------------------------------
# norms and bounds
# ---------------------------------------------------------------------

def _x_weights(prob: BvpProblem, M: int):
    w = cheb_weights(prob.omega, M)
    return w


def _xnorm_vec(param_mag: float, rows_mag: np.ndarray, prob: BvpProblem) -> float:
    M = rows_mag.shape[-1] - 1
    w = _x_weights(prob, M).hi
    comp = max(float(dot_upper(w, rows_mag[i])) for i in range(4))
    return max(param_mag, comp)


def _cnorm_upper(p: RIArr, omega: float) -> Interval:
    w = cheb_weights(omega, p.shape[-1] - 1)
    mags = RIArr(np.where((p.lo <= 0) & (p.hi >= 0), 0.0,
                          np.minimum(np.abs(p.lo), np.abs(p.hi))), p.mag())
    t = (mags * w).sum_interval()
    return Interval(max(0.0, t.lo), t.hi)


def bound_Y_bvp(cand: BvpCandidate, Af: np.ndarray, prob: BvpProblem,
                residual=None):
    """Preconditioned residual with the chart uncertainty carried inside
    the boundary rows, plus the diagonally inverted mode tail."""
    MV = prob.mv
    param, rows, W_enc = residual if residual is not None else \
        F_bvp_residual(cand, prob)
    inner = RIArr.zeros(1 + 4 * (MV + 1))
    inner[0] = param
    for i in range(4):
        inner[1 + i * (MV + 1):1 + (i + 1) * (MV + 1)] = rows[i][0:MV + 1]
    col = RIMat.from_ri(RIArr(inner.lo[:, None], inner.hi[:, None]))
    Av = rig_matmul(RIMat(Af), col).to_ri()
    Av_mag = RIArr(Av.lo[:, 0], Av.hi[:, 0]).mag()
    Y1 = _xnorm_vec(float(Av_mag[0]),
                    Av_mag[1:].reshape(4, MV + 1), prob)
    # mode tail (MV, 3MV+1], divided by 2m
    mm = np.arange(MV + 1, 3 * MV + 2, dtype=float)
    wtail = cheb_weights(prob.omega, 3 * MV + 1).hi[MV + 1:]
    Y2 = 0.0
    for i in range(4):
        mags = rows[i][MV + 1:].mag()
        Y2 = max(Y2, float(dot_upper(wtail, mags / np.nextafter(2.0 * mm, -np.inf))))
    # the crude operator-norm form of the boundary term, kept as a
    # diagnostic for comparison with the certificate formula
    bmax = max(rows[i].mag()[0] for i in range(4))
    return Y1 + Y2, {"preconditioned": Y1, "mode_tail": Y2,
                     "boundary_residual_mag": bmax}, W_enc


def _assemble_DF_interval(cand: BvpCandidate, prob: BvpProblem,
                          dW_enc) -> RIArr:
    """Interval derivative matrix on the validation window: rows
    param + 4x[0, MV]; columns param + 4x[0, 3MV+1]. The sigma column
    uses the truncated-chart derivative enclosure dW_enc."""
    MV = prob.mv
    MM = 3 * MV + 1
    kap = prob.kappa_iv
    nrow = 1 + 4 * (MV + 1)
    ncol = 1 + 4 * (MM + 1)
    out = RIArr.zeros((nrow, ncol))
    s = [RIArr.point(np.pad(cand.s[i], (0, MV - cand.MC))) for i in range(4)]
    q11 = _cconv_iv(s[0], s[0])

    def conv_rows(kern: RIArr, scal: Interval) -> RIArr:
        """Multiplication-operator rows 0..MV+1 over columns 0..MM:
        entry (mr, mc) is kern_{|mr-mc|} + kern_{mr+mc} (mc >= 1)."""
        A = RIArr.zeros((MV + 2, MM + 1))
        kn = kern.shape[-1]
        for mr in range(MV + 2):
            if mr < kn:
                A[mr, 0] = kern.interval(mr)
            for mc in range(1, MM + 1):
                vals = []
                if abs(mr - mc) < kn:
                    vals.append(kern.interval(abs(mr - mc)))
                if mr + mc < kn:
                    vals.append(kern.interval(mr + mc))
                if vals:
                    A[mr, mc] = vals[0] if len(vals) == 1 else vals[0] + vals[1]
        return A * scal

    blocks = {}
    eye = RIArr.zeros((MV + 2, MM + 1))
    for m in range(MV + 2):
        eye[m, m] = 1.0
    blocks[(0, 1)] = eye
    b10 = conv_rows(s[2], prob.b) + conv_rows(q11, 3.0 * prob.c)
    neg_a = RIArr.zeros((MV + 2, MM + 1))
    for m in range(MV + 2):
        neg_a[m, m] = Interval(0.0) - prob.a
    blocks[(1, 0)] = b10 + neg_a
    blocks[(1, 2)] = conv_rows(s[0], prob.b)
    blocks[(2, 3)] = eye
    blocks[(3, 2)] = eye * (-4.0)
    for i in range(4):
        ri = 1 + i * (MV + 1)
        for j in range(4):
            if (i, j) in blocks:
                Dij = blocks[(i, j)]
                cj = 1 + j * (MM + 1)
                T = RIArr(Dij.lo[2:MV + 2], Dij.hi[2:MV + 2]) - \
                    RIArr(Dij.lo[0:MV], Dij.hi[0:MV])
                seg = out[ri + 1:ri + MV + 1, cj:cj + MM + 1]
                out[ri + 1:ri + MV + 1, cj:cj + MM + 1] = seg + T * kap
        for m in range(1, MV + 1):
            cur = out.interval(ri + m, 1 + i * (MM + 1) + m)
            out[ri + m, 1 + i * (MM + 1) + m] = cur + Interval.point(2.0 * m)
    # boundary rows and the parameter row/column
    ev1 = np.concatenate([[1.0], 2.0 * np.ones(MM)])
    evm1 = np.concatenate([[1.0], 2.0 * (-1.0) ** np.arange(1, MM + 1)])
    dW1, dW2 = dW_enc
    r0 = [1, 1 + (MV + 1), 1 + 2 * (MV + 1), 1 + 3 * (MV + 1)]
    for k, (row0, pattern, comp) in enumerate(
            [(r0[0], ev1, 0), (r0[1], ev1, 1), (r0[2], evm1, 2), (r0[3], evm1, 3)]):
        cj = 1 + comp * (MM + 1)
        seg = out[row0, cj:cj + MM + 1]
        out[row0, cj:cj + MM + 1] = seg + RIArr.point(pattern)
    out[r0[0], 0] = Interval(0.0) - dW1
    out[r0[1], 0] = Interval(0.0) - dW2
    out[0, 1 + (MM + 1):1 + 2 * (MM + 1)] = RIArr.point(evm1)
    return out


def _block_opnorm_bvp(mag: np.ndarray, prob: BvpProblem, M_rows: int,
                      M_cols: int) -> float:
    """Block rule on the param + 4 component layout."""
    w_out = cheb_weights(prob.omega, M_rows).hi
    w_in = cheb_weights(prob.omega, M_cols).lo
    nr, nc = M_rows + 1, M_cols + 1
    totals = []
    row_blocks = [("param", slice(0, 1))] + \
        [("seq", slice(1 + i * nr, 1 + (i + 1) * nr)) for i in range(4)]
    col_blocks = [slice(0, 1)] + \
        [slice(1 + j * nc, 1 + (j + 1) * nc) for j in range(4)]
    for kind, rs in row_blocks:
        tot = 0.0
        for k, cs in enumerate(col_blocks):
            sub = mag[rs, cs]
            div = np.ones(1) if k == 0 else w_in
            if kind == "param":
                blk = float(np.max(sub[0] / div))
            else:
                blk = float(np.max(dot_upper(w_out[:, None], sub, axis=0) / div))
            tot += blk
        totals.append(tot * (1 + 2 ** -48))
    return max(totals)


def bound_Z1_bvp(cand: BvpCandidate, Af: np.ndarray, prob: BvpProblem,
                 Af_norm: float):
    """Combined finite defect plus the chart-derivative defect, the
    integration tail and the boundary-functional tail."""
    MV = prob.mv
    r_TF = prob.manifold.r_TF
    sg = abs(cand.sigma)
    dW_enc = eval_W_rigorous(prob.manifold, prob.theta,
                             Interval.point(cand.sigma), deriv=1,
                             include_tail=False)
    DFe = _assemble_DF_interval(cand, prob, dW_enc)
    prod = rig_matmul(RIMat(Af), RIMat.from_ri(DFe))
    MM = 3 * MV + 1
    nrow, ncol = 1 + 4 * (MV + 1), 1 + 4 * (MM + 1)
    ident = np.zeros((nrow, ncol))
    ident[0, 0] = 1.0
    for i in range(4):
        for m in range(MV + 1):
            ident[1 + i * (MV + 1) + m, 1 + i * (MM + 1) + m] = 1.0
    diff = RIMat(ident) - prod
    fin = _block_opnorm_bvp(diff.abs_upper(), prob, MV, MM)

    one_minus = Interval.point(1.0) - Interval.point(sg)
    t_chart = (Interval.point(r_TF) * Af_norm / one_minus.sq()).hi
    s1n = _cnorm_upper(RIArr.point(cand.s[0]), prob.omega)
    s3n = _cnorm_upper(RIArr.point(cand.s[2]), prob.omega)
    q11n = _cnorm_upper(_cconv_iv(RIArr.point(cand.s[0]), RIArr.point(cand.s[0])),
                        prob.omega)
    fmax_iv = prob.a.abs() + prob.b.abs() * (s1n + s3n) + 3.0 * prob.c.abs() * q11n
    fmax = max(4.0, fmax_iv.hi)
    kap_mag = prob.kappa_iv.abs().hi
    t_int = (Interval.point(prob.omega) * kap_mag *
             Interval.point(fmax) / float(MV)).hi
    wp = weight_powers(prob.omega, 3 * MV + 2)
    t_bnd = (Interval.point(Af_norm) / wp.interval(3 * MV + 2)).hi
    Z1 = fin + t_chart + t_int + t_bnd
    parts = {"finite": fin, "chart_defect": t_chart, "integration_tail": t_int,
             "boundary_tail": t_bnd, "s1_norm": s1n.hi, "s3_norm": s3n.hi,
             "q11_norm": q11n.hi}
    return Z1, parts


def bound_Z2_bvp(cand: BvpCandidate, Af: np.ndarray, prob: BvpProblem,
                 Af_norm: float, r_star: float, s1n_hi: float):
    """Lipschitz bound at radius r_star, with the chart second
    derivative enclosed over the sigma ball."""
    MV = prob.mv
    r_TF = prob.manifold.r_TF
    sg_ball = Interval(cand.sigma - r_star, cand.sigma + r_star)
    if not (sg_ball.abs().hi < 1.0):
        raise ValueError("|sigma| + r_star must stay below 1")
    d2W1, d2W2 = eval_W_rigorous(prob.manifold, prob.theta, sg_ball,
                                 deriv=2, include_tail=True)
    supd2 = max(d2W1.mag(), d2W2.mag())
    kap_mag = prob.kappa_iv.abs().hi
    first = (2.0 * Interval.point(prob.omega) * kap_mag
             * (Interval.point(Af_norm) + tail_norm_bounds("cheb-linv", M=MV))
             * (2.0 * prob.b.abs() + 6.0 * prob.c.abs() * s1n_hi
                + 3.0 * prob.c.abs() * r_star))
    # ||A_f (param + zeroth-coefficient columns)||
    cols = [0] + [1 + i * (MV + 1) for i in range(4)]
    mag_cols = np.abs(Af[:, cols])
    w_out = cheb_weights(prob.omega, MV).hi
    totals = [float(np.max(mag_cols[0]))]
    for i in range(4):
        rows = slice(1 + i * (MV + 1), 1 + (i + 1) * (MV + 1))
        colsum = dot_upper(w_out[:, None], mag_cols[rows], axis=0)
        totals.append(float(np.sum(colsum)))
    AfP = max(totals) * (1 + 2 ** -48)
    second = Interval.point(AfP) * supd2
    return (first + second).hi, {"df_part": first.hi, "boundary_part": second.hi,
                                 "sup_d2W": supd2, "AfP": AfP}


def validate_soliton(cand: BvpCandidate, prob: BvpProblem,
                     r_star: float | None = None) -> SolitonCertificate:
    cand.check(prob)
    r_star = prob.r_star if r_star is None else r_star
    if not (abs(cand.sigma) + r_star < 1.0):
        raise ValueError("|sigma| + r_star must stay below 1")
    MV = prob.mv
    mc = prob.manifold.candidate
    s_pad = np.zeros((4, MV + 1))
    s_pad[:, :prob.MC + 1] = cand.s
    DF_float = numerics.bvp_DF(prob.a.mid, prob.b.mid, prob.c.mid, prob.kappa,
                               cand.sigma, s_pad, mc.w1, mc.w2, prob.theta.mid)
    Af = numerics.approx_inverse(DF_float)
    Af_norm = _block_opnorm_bvp(np.abs(Af), prob, MV, MV)
    Y, y_parts, W_enc = bound_Y_bvp(cand, Af, prob)
    Z1, z1_parts = bound_Z1_bvp(cand, Af, prob, Af_norm)
    Z2, z2_parts = bound_Z2_bvp(cand, Af, prob, Af_norm, r_star,
                                z1_parts["s1_norm"])
    res = radii_from_bounds(KBounds(Y=Y, Z1=Z1, Z2=Z2, r_star=r_star))
    diagnostics = {"Af_norm": Af_norm, "Y_parts": y_parts, "Z1_parts": z1_parts,
                   "Z2_parts": z2_parts,
                   "Y_boundary_crude": Af_norm * (y_parts["boundary_residual_mag"]
                                                  + prob.manifold.r_TF)}
    if not res.feasible:
        verdict = f"failed: {res.reason}"
        r_C = float("nan")
    elif res.r_min > r_star:
        verdict = f"failed: radius {res.r_min} exceeds r* = {r_star}"
        r_C = res.r_min
    else:
        verdict = "proved"
        r_C = res.r_min
    return SolitonCertificate(verdict=verdict, Y=Y, Z1=Z1, Z2=Z2, r_C=r_C,
                              diagnostics=diagnostics, problem=prob, candidate=cand)


# ---------------------------------------------------------------------
# certified profile assembly
# ---------------------------------------------------------------------

def assemble_soliton(cert: SolitonCertificate, x_max: float, npoints: int = 400):
    """Sampled even soliton profile with per-sample rigorous error.

    For |x| <= L the profile is the first Chebyshev component with error
    r_C; beyond, the orbit lies on the chart and is evaluated through
    the flow conjugacy with the exponent and connection parameter as
    intervals. Returns a list of rows (x, u, err, region) with x >= 0;
    the even extension mirrors them exactly.
    """
    if not cert.proved:
        raise ValueError("assembly needs a proved certificate")
    prob = cert.problem
    cand = cert.candidate
    L = prob.L
    lam_iv = prob.manifold.lam_iv
    r_C = cert.r_C
    s1 = cand.s[0]
    rows = []
    xs = np.linspace(0.0, x_max, npoints)
    from .seqspace import ChebSeq
    seq1 = ChebSeq.from_real(s1, prob.omega)
    sig_iv = Interval(cand.sigma - r_C, cand.sigma + r_C)
    for x in xs:
        if x <= L:
            t = 2.0 * x / L - 1.0
            t = min(1.0, max(-1.0, t))
            enc = seq1.eval(Interval.point(t))
            u = enc.mid
            err = (Interval.point(r_C) + Interval(0.0, enc.width * 0.5)).hi
            rows.append((x, u, err, "bvp"))
        else:
            tau = x - L
            th = prob.theta + tau
            decay = exp_interval(lam_iv * tau)
            sig = Interval.hull(decay * sig_iv)
            if not (sig.abs().hi <= 1.0):
                raise ValueError("sigma window left the chart domain")
            W1, _ = eval_W_rigorous(prob.manifold, th, sig, deriv=0)
            u = W1.mid
            err = max(W1.hi - u, u - W1.lo)
            rows.append((x, u, err, "manifold"))
    return rows
