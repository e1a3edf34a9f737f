"""Floating-point front-end: initial guesses, Newton refinement, dense
linear algebra and the independent ODE oracle.

Nothing here is rigorous; these routines produce candidates whose
correctness is established afterwards by the interval-arithmetic
validation stages. The truncated derivative assemblies double as the
targets whose numerical inverses become the preconditioners there, so
both sides stay structurally consistent.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import chebyshev as _cheb
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

__all__ = [
    "NoStableExponent",
    "NewtonDivergence",
    "SeedRejected",
    "monodromy_oracle",
    "floquet_eig",
    "bundle_DF",
    "newton_refine_bundle",
    "bundle_residual_norm",
    "homological_recursion",
    "manifold_residual_norm",
    "eval_W_float",
    "gp_field",
    "conserved_H",
    "integrate_orbit",
    "shooting_scan",
    "bvp_seed",
    "bvp_DF",
    "bvp_residual",
    "newton_refine_bvp",
    "bvp_residual_norm",
    "approx_inverse",
    "cheb_interpolate",
    "gamma3_band",
]


class NoStableExponent(RuntimeError):
    """Parameters lie outside a spectral gap: |mu| = 1 for both Floquet
    multipliers."""


class NewtonDivergence(RuntimeError):
    pass


class SeedRejected(RuntimeError):
    pass


# ---------------------------------------------------------------------
# stage 1 numerics
# ---------------------------------------------------------------------

def monodromy_oracle(a: float, b: float, tol: float = 1e-12) -> float:
    """Stable Floquet exponent of u'' + (a - b cos 2x) u = 0 over [0, pi].

    Integrates the two basis solutions, takes the period map's stable
    eigenvalue mu (|mu| < 1) and returns log|mu|/pi < 0.
    """
    def rhs(x, y):
        p = -(a - b * np.cos(2.0 * x))
        return [y[2], y[3], p * y[0], p * y[1]]

    sol = solve_ivp(rhs, (0.0, np.pi), [1.0, 0.0, 0.0, 1.0],
                    rtol=tol, atol=tol, method="DOP853")
    if not sol.success:
        raise RuntimeError(f"monodromy integration failed: {sol.message}")
    Phi = sol.y[:, -1].reshape(2, 2)
    tr = Phi[0, 0] + Phi[1, 1]
    if abs(tr) <= 2.0:
        raise NoStableExponent(f"period map trace {tr} in [-2, 2]")
    disc = np.sqrt(tr * tr - 4.0)
    mu = min((tr + disc) / 2.0, (tr - disc) / 2.0, key=abs)
    return float(np.log(abs(mu)) / np.pi)


def gamma3_band(M_row: int, M_col: int) -> np.ndarray:
    """Convolution matrix of the cos(2 theta) coefficient sequence
    (1/2 at modes +-2) from modes [-M_col, M_col] to [-M_row, M_row]."""
    rows = np.arange(-M_row, M_row + 1)
    cols = np.arange(-M_col, M_col + 1)
    return 0.5 * (np.abs(rows[:, None] - cols[None, :]) == 2).astype(float)


def _conj_flip(u: np.ndarray) -> np.ndarray:
    return np.conj(u[::-1])


def floquet_eig(a: float, b: float, M: int, l: float = 0.5,
                oracle_tol: float = 1e-6):
    """Eigen-solve of the truncated mode coupling for the stable
    exponent and bundle direction.

    Returns (lam_hat, v1, v2) with v conjugate-symmetrized and scaled so
    the phase functional sum(v1) equals l. Aborts when no real negative
    eigenvalue sits within oracle_tol of the period-map oracle.
    """
    if M < 4:
        raise ValueError("M >= 4 required")
    lam_star = monodromy_oracle(a, b)
    K = 2 * M + 1
    ms = np.arange(-M, M + 1)
    D = np.diag(1j * ms)
    G = gamma3_band(M, M)
    E = np.block([[-D, np.eye(K)], [-a * np.eye(K) + b * G, -D]])
    ev, V = np.linalg.eig(E)
    cand = [i for i in range(ev.size)
            if abs(ev[i].imag) < 1e-7 and ev[i].real < 0.0]
    if not cand:
        raise NoStableExponent("no real negative eigenvalue in the truncated system")
    ib = min(cand, key=lambda i: abs(ev[i].real - lam_star))
    lam_hat = float(ev[ib].real)
    if abs(lam_hat - lam_star) > oracle_tol:
        raise NoStableExponent(
            f"eigenvalue {lam_hat} differs from oracle {lam_star} by more than {oracle_tol}")
    v1, v2 = V[:K, ib], V[K:, ib]
    v1s, v2s = (v1 + _conj_flip(v1)) / 2.0, (v2 + _conj_flip(v2)) / 2.0
    if np.linalg.norm(v1s) < 1e-8 * np.linalg.norm(v1):
        v1s = (v1 - _conj_flip(v1)) / 2.0j
        v2s = (v2 - _conj_flip(v2)) / 2.0j
    eta = np.sum(v1s).real
    if abs(eta) < 1e-12:
        raise NoStableExponent("degenerate phase functional on the eigenvector")
    v1s, v2s = v1s * (l / eta), v2s * (l / eta)
    return lam_hat, v1s, v2s


def bundle_DF(a: float, b: float, lam: float, v1: np.ndarray, v2: np.ndarray) -> np.ndarray:
    """Truncated derivative of the bundle map at (lam, v): the matrix
    whose numerical inverse becomes the stage-1 preconditioner."""
    K = v1.size
    M = (K - 1) // 2
    ms = np.arange(-M, M + 1)
    G = gamma3_band(M, M)
    n = 1 + 2 * K
    J = np.zeros((n, n), dtype=complex)
    J[0, 1:1 + K] = 1.0                     # phase row
    J[1:1 + K, 0] = v1                      # lambda column
    J[1 + K:, 0] = v2
    Lm = np.diag(1j * ms + lam)
    J[1:1 + K, 1:1 + K] = Lm
    J[1:1 + K, 1 + K:] = -np.eye(K)
    J[1 + K:, 1:1 + K] = a * np.eye(K) - b * G
    J[1 + K:, 1 + K:] = Lm
    return J


def _wnorm(u: np.ndarray, nu: float) -> float:
    M = (u.size - 1) // 2
    return float(np.sum(np.abs(u) * nu ** np.abs(np.arange(-M, M + 1))))


def bundle_residual_norm(a, b, lam, v1, v2, nu, l) -> float:
    """Weighted norm of the truncated bundle residual (phase row plus
    both sequence components over the stored window)."""
    K = v1.size
    M = (K - 1) // 2
    ms = np.arange(-M, M + 1)
    G = gamma3_band(M, M)
    r0 = np.sum(v1) - l
    r1 = (1j * ms + lam) * v1 - v2
    r2 = (1j * ms + lam) * v2 + a * v1 - b * (G @ v1)
    return max(abs(r0), _wnorm(r1, nu), _wnorm(r2, nu))


def newton_refine_bundle(a, b, lam, v1, v2, nu, l, tol=1e-13, max_iter=25):
    """Newton on the truncated bundle system; exact conjugate
    symmetrization afterwards. Returns (lam, v1, v2, residual)."""
    K = v1.size
    M = (K - 1) // 2
    ms = np.arange(-M, M + 1)
    G = gamma3_band(M, M)
    x = np.concatenate([[complex(lam)], v1, v2])
    last = np.inf
    grew = 0
    for _ in range(max_iter):
        lm, u1, u2 = x[0].real, x[1:1 + K], x[1 + K:]
        r0 = np.sum(u1) - l
        r1 = (1j * ms + lm) * u1 - u2
        r2 = (1j * ms + lm) * u2 + a * u1 - b * (G @ u1)
        res = max(abs(r0), _wnorm(r1, nu), _wnorm(r2, nu))
        if res < tol:
            break
        grew = grew + 1 if res > last else 0
        if grew >= 3:
            raise NewtonDivergence(f"bundle residual growing: {res}")
        last = res
        J = bundle_DF(a, b, lm, u1, u2)
        x = x + np.linalg.solve(J, -np.concatenate([[r0], r1, r2]))
    lam = float(x[0].real)
    v1 = x[1:1 + K]
    v2 = x[1 + K:]
    # enforce the symmetry hypothesis bit-exactly
    v1 = (v1 + _conj_flip(v1)) / 2.0
    v2 = (v2 + _conj_flip(v2)) / 2.0
    res = bundle_residual_norm(a, b, lam, v1, v2, nu, l)
    return lam, v1, v2, res


# ---------------------------------------------------------------------
# stage 2 numerics
# ---------------------------------------------------------------------

def homological_recursion(a, b, c, lam, v1, v2, N, resonance_tol=1e-10):
    """Order-by-order solves for the manifold coefficients.

    Orders 0 and 1 are (0, v); for n >= 2 the order-n pair solves the
    2(2M+1) linear system with the cubic forcing from lower orders.
    Returns (w1, w2) of shape (N+1, 2M+1).
    """
    K = v1.size
    M = (K - 1) // 2
    ms = np.arange(-M, M + 1)
    G = gamma3_band(M, M)
    w1 = np.zeros((N + 1, K), dtype=complex)
    w2 = np.zeros((N + 1, K), dtype=complex)
    w1[1], w2[1] = v1, v2
    # running Cauchy products of w1 with itself, modes [-2M, 2M]
    sq = np.zeros((N + 1, 4 * M + 1), dtype=complex)
    for n in range(2, N + 1):
        sq[n] = sum(np.convolve(w1[l1], w1[n - l1]) for l1 in range(1, n))
        cub = np.zeros(6 * M + 1, dtype=complex)
        for l1 in range(2, n):
            l3 = n - l1
            if l3 >= 1:
                cub += np.convolve(sq[l1], w1[l3])
        rhs2 = c * cub[3 * M - M:3 * M + M + 1]
        mag = np.abs(1j * ms + n * lam)
        if np.min(mag) < resonance_tol:
            mm = int(ms[np.argmin(mag)])
            raise NewtonDivergence(f"near-resonant order system at (n, m) = ({n}, {mm})")
        Dn = np.diag(1j * ms + n * lam)
        A2 = np.block([[Dn, -np.eye(K)], [a * np.eye(K) - b * G, Dn]])
        sol = np.linalg.solve(A2, np.concatenate([np.zeros(K), rhs2]))
        w1[n], w2[n] = sol[:K], sol[K:]
    # exact per-order symmetrization (solves preserve it up to roundoff)
    for n in range(2, N + 1):
        w1[n] = (w1[n] + _conj_flip(w1[n])) / 2.0
        w2[n] = (w2[n] + _conj_flip(w2[n])) / 2.0
    return w1, w2


def manifold_residual_norm(a, b, c, lam, w1, w2, nu) -> float:
    """Weighted truncated residual of the order system, rows 2..N over
    the stored mode window."""
    N = w1.shape[0] - 1
    K = w1.shape[1]
    M = (K - 1) // 2
    ms = np.arange(-M, M + 1)
    G = gamma3_band(M, M)
    sq = np.zeros((2 * N + 1, 4 * M + 1), dtype=complex)
    for l1 in range(1, N + 1):
        for l2 in range(1, N + 1):
            sq[l1 + l2] += np.convolve(w1[l1], w1[l2])
    best = 0.0
    r1tot = 0.0
    r2tot = 0.0
    for n in range(2, N + 1):
        cub = np.zeros(6 * M + 1, dtype=complex)
        for l1 in range(2, n):
            l3 = n - l1
            if l3 >= 1:
                cub += np.convolve(sq[l1], w1[l3])
        cub_c = cub[3 * M - M:3 * M + M + 1]
        r1 = (1j * ms + n * lam) * w1[n] - w2[n]
        r2 = (1j * ms + n * lam) * w2[n] + a * w1[n] - b * (G @ w1[n]) - c * cub_c
        r1tot += _wnorm(r1, nu)
        r2tot += _wnorm(r2, nu)
    best = max(r1tot, r2tot)
    return best


def eval_W_float(w1, w2, theta, sigma, deriv=0):
    """Float evaluation of the truncated chart (components 1, 2)."""
    N = w1.shape[0] - 1
    K = w1.shape[1]
    M = (K - 1) // 2
    em = np.exp(1j * np.arange(-M, M + 1) * theta)
    n = np.arange(N + 1, dtype=float)
    if deriv == 0:
        f = sigma ** n
    elif deriv == 1:
        f = np.concatenate([[0.0], n[1:] * sigma ** (n[1:] - 1)])
    elif deriv == 2:
        f = np.concatenate([[0.0, 0.0], n[2:] * (n[2:] - 1) * sigma ** (n[2:] - 2)])
    else:
        raise ValueError("deriv in {0, 1, 2}")
    return float(((w1 @ em) @ f).real), float(((w2 @ em) @ f).real)


# ---------------------------------------------------------------------
# ODE oracle and seeding
# ---------------------------------------------------------------------

def gp_field(a, b, c):
    def rhs(x, u):
        return [u[1], -a * u[0] + b * u[2] * u[0] + c * u[0] ** 3, u[3], -4.0 * u[2]]
    return rhs


def conserved_H(state) -> float:
    u3, u4 = state[2], state[3]
    return 0.5 * (u4 * u4 + 4.0 * u3 * u3)


def integrate_orbit(a, b, c, u0, x_span, tol=1e-12, dense=False):
    sol = solve_ivp(gp_field(a, b, c), x_span, u0, rtol=tol, atol=tol,
                    method="DOP853", dense_output=dense)
    if not sol.success:
        raise SeedRejected(f"integration failed: {sol.message}")
    return sol


BLOWUP = 1e6


def shooting_scan(a, b, c, w1, w2, theta, L, sigma_lo=0.02, sigma_hi=0.985,
                  npoints=60, tol=1e-12):
    """Roots of sigma -> u2(0; sigma) for backward orbits launched on
    the approximate manifold chart. Blow-ups mark the sigma as invalid."""
    def h(sg):
        W1v, W2v = eval_W_float(w1, w2, theta, sg)
        u0 = [W1v, W2v, np.cos(2.0 * theta), -2.0 * np.sin(2.0 * theta)]
        try:
            sol = solve_ivp(gp_field(a, b, c), (L, 0.0), u0, rtol=tol, atol=tol,
                            method="DOP853")
        except (OverflowError, FloatingPointError):
            return np.nan
        if not sol.success or np.max(np.abs(sol.y[:2, -1])) > BLOWUP:
            return np.nan
        return float(sol.y[1, -1])

    grid = np.linspace(sigma_lo, sigma_hi, npoints)
    vals = np.array([h(s) for s in grid])
    roots = []
    for i in range(npoints - 1):
        if np.isfinite(vals[i]) and np.isfinite(vals[i + 1]) and vals[i] * vals[i + 1] < 0:
            roots.append(float(brentq(h, grid[i], grid[i + 1],
                                      xtol=1e-13, rtol=8.9e-16)))
    return roots


def cheb_interpolate(func, deg: int) -> np.ndarray:
    """Chebyshev coefficients of func on [-1,1] in the factor-2
    convention: f = s_0 + 2 sum_{m>=1} s_m T_m."""
    d = _cheb.chebinterpolate(func, deg)
    s = np.asarray(d, dtype=float).copy()
    s[1:] = s[1:] / 2.0
    return s


def bvp_seed(a, b, c, w1, w2, theta, L, sigma0, MC, tol=1e-13):
    """Backward-integrated trajectory from the chart point, sampled and
    transformed to Chebyshev coefficients. Returns (sigma0, s[4, MC+1])."""
    if not (abs(sigma0) < 1.0):
        raise SeedRejected(f"|sigma0| = {abs(sigma0)} >= 1")
    if not (L > 0):
        raise SeedRejected("L must be positive")
    kappa = L / 2.0
    W1v, W2v = eval_W_float(w1, w2, theta, sigma0)
    u0 = [W1v, W2v, np.cos(2.0 * theta), -2.0 * np.sin(2.0 * theta)]
    sol = integrate_orbit(a, b, c, u0, (L, 0.0), tol=tol, dense=True)
    if np.max(np.abs(sol.y[:2])) > BLOWUP:
        raise SeedRejected("trajectory blow-up during backward integration")
    s = np.empty((4, MC + 1))
    for i in range(4):
        s[i] = cheb_interpolate(lambda t: sol.sol(kappa * (np.asarray(t) + 1.0))[i], MC)
    return float(sigma0), s


# ---------------------------------------------------------------------
# stage 3 numerics
# ---------------------------------------------------------------------

def _cconv(p, q):
    P = np.concatenate([p[:0:-1], p])
    Q = np.concatenate([q[:0:-1], q])
    return np.convolve(P, Q)[p.size - 1 + q.size - 1:]


def _conv_mat(p, nrow, ncol):
    """Chebyshev multiplication matrix (Toeplitz plus Hankel)."""
    A = np.zeros((nrow + 1, ncol + 1))
    pv = lambda k: p[abs(k)] if abs(k) < p.size else 0.0
    for mr in range(nrow + 1):
        A[mr, 0] = pv(mr)
        for mc in range(1, ncol + 1):
            A[mr, mc] = pv(mr - mc) + pv(mr + mc)
    return A


def _eval_pm(sv, t):
    return sv[0] + 2.0 * np.sum((float(t) ** np.arange(1, sv.size)) * sv[1:])


def bvp_residual(a, b, c, kappa, sigma, s, w1, w2, theta):
    """Full rows of the connecting map at a float candidate: parameter
    slot and rows 0..3*MC+1 per component (row 0 carries the boundary
    data)."""
    MC = s.shape[1] - 1
    MM = 3 * MC + 1

    def pad(p):
        out = np.zeros(MM + 1)
        out[:min(p.size, MM + 1)] = p[:MM + 1]
        return out

    fs = [pad(s[1]),
          -a * pad(s[0]) + b * pad(_cconv(s[2], s[0])) + c * pad(_cconv(_cconv(s[0], s[0]), s[0])),
          pad(s[3]),
          -4.0 * pad(s[2])]
    rows = np.zeros((4, MM + 1))
    mm = np.arange(MM + 1)
    for i in range(4):
        Ls = 2.0 * mm * pad(s[i])
        Ls[0] = 0.0
        Tf = np.zeros(MM + 1)
        Tf[1:MM] = -fs[i][0:MM - 1] + fs[i][2:MM + 1]
        Tf[MM] = -fs[i][MM - 1]
        rows[i] = Ls + kappa * Tf
    W1v, W2v = eval_W_float(w1, w2, theta, sigma)
    rows[0, 0] = _eval_pm(s[0], 1) - W1v
    rows[1, 0] = _eval_pm(s[1], 1) - W2v
    rows[2, 0] = _eval_pm(s[2], -1) - 1.0
    rows[3, 0] = _eval_pm(s[3], -1)
    param = _eval_pm(s[1], -1)
    return param, rows


def bvp_DF(a, b, c, kappa, sigma, s, w1, w2, theta, ncols: int | None = None):
    """Truncated derivative of the connecting map; square when ncols is
    None, rectangular (columns 0..ncols per component) otherwise."""
    MC = s.shape[1] - 1
    NC = MC if ncols is None else ncols
    n = 1 + 4 * (MC + 1)
    J = np.zeros((n, 1 + 4 * (NC + 1)))
    q11 = _cconv(s[0], s[0])
    blocks = {(0, 1): np.eye(MC + 2, NC + 1),
              (1, 0): -a * np.eye(MC + 2, NC + 1) + b * _conv_mat(s[2], MC + 1, NC)
                      + 3.0 * c * _conv_mat(q11, MC + 1, NC),
              (1, 2): b * _conv_mat(s[0], MC + 1, NC),
              (2, 3): np.eye(MC + 2, NC + 1),
              (3, 2): -4.0 * np.eye(MC + 2, NC + 1)}
    for i in range(4):
        ri = 1 + i * (MC + 1)
        for j in range(4):
            if (i, j) in blocks:
                Dij = blocks[(i, j)]
                Bb = np.zeros((MC + 1, NC + 1))
                for m in range(1, MC + 1):
                    Bb[m] = -Dij[m - 1] + Dij[m + 1]
                J[ri:ri + MC + 1, 1 + j * (NC + 1):1 + (j + 1) * (NC + 1)] += kappa * Bb
        mm = np.arange(MC + 1)
        cj = 1 + i * (NC + 1)
        J[ri + mm[1:], cj + mm[1:]] += 2.0 * mm[1:]
    ev1 = np.concatenate([[1.0], 2.0 * np.ones(NC)])
    evm1 = np.concatenate([[1.0], 2.0 * (-1.0) ** np.arange(1, NC + 1)])
    dW1, dW2 = eval_W_float(w1, w2, theta, sigma, deriv=1)
    J[1, 1:1 + NC + 1] += ev1
    J[1, 0] = -dW1
    J[1 + (MC + 1), 1 + (NC + 1):1 + 2 * (NC + 1)] += ev1
    J[1 + (MC + 1), 0] = -dW2
    J[1 + 2 * (MC + 1), 1 + 2 * (NC + 1):1 + 3 * (NC + 1)] += evm1
    J[1 + 3 * (MC + 1), 1 + 3 * (NC + 1):1 + 4 * (NC + 1)] += evm1
    J[0, 1 + (NC + 1):1 + 2 * (NC + 1)] = evm1
    return J


def _cnorm(p, omega):
    w = np.concatenate([[1.0], 2.0 * omega ** np.arange(1, p.size)])
    return float(np.sum(np.abs(p) * w))


def bvp_residual_norm(a, b, c, kappa, sigma, s, w1, w2, theta, omega) -> float:
    """Weighted truncated residual: parameter row plus rows 0..MC."""
    MC = s.shape[1] - 1
    param, rows = bvp_residual(a, b, c, kappa, sigma, s, w1, w2, theta)
    return max(abs(param), max(_cnorm(rows[i, :MC + 1], omega) for i in range(4)))


def newton_refine_bvp(a, b, c, kappa, sigma, s, w1, w2, theta, omega,
                      tol=1e-13, max_iter=25):
    MC = s.shape[1] - 1
    x = np.concatenate([[sigma], s.ravel()])
    last = np.inf
    grew = 0
    for _ in range(max_iter):
        sg, sc = float(x[0]), x[1:].reshape(4, MC + 1)
        param, rows = bvp_residual(a, b, c, kappa, sg, sc, w1, w2, theta)
        res = max(abs(param), max(_cnorm(rows[i, :MC + 1], omega) for i in range(4)))
        if res < tol:
            break
        grew = grew + 1 if res > last else 0
        if grew >= 3:
            raise NewtonDivergence(f"bvp residual growing: {res}")
        last = res
        J = bvp_DF(a, b, c, kappa, sg, sc, w1, w2, theta)
        rhs = np.concatenate([[param], rows[:, :MC + 1].ravel()])
        x = x + np.linalg.solve(J, -rhs)
    sg, sc = float(x[0]), x[1:].reshape(4, MC + 1)
    res = bvp_residual_norm(a, b, c, kappa, sg, sc, w1, w2, theta, omega)
    return sg, sc, res


# ---------------------------------------------------------------------
# dense linear algebra
# ---------------------------------------------------------------------

def approx_inverse(m: np.ndarray, cond_limit: float = 1e12) -> np.ndarray:
    """Floating inverse via pivoted factorization; no rigor claimed."""
    c = np.linalg.cond(m, 1)
    if not np.isfinite(c) or c > cond_limit:
        raise np.linalg.LinAlgError(f"matrix numerically singular (cond ~ {c:.2e})")
    return np.linalg.inv(m)
