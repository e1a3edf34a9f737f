import numpy as np
import pytest

from gapsol import numerics as nm

RNG = np.random.default_rng(11)

MAIN = dict(a=1.1025, b=0.55125, c=-0.826875)
NU = 1.05


class TestMonodromy:
    def test_constant_coefficient_closed_form(self):
        # u'' = u: stable multiplier e^{-pi}, exponent -1
        lam = nm.monodromy_oracle(-1.0, 0.0)
        assert abs(lam + 1.0) < 1e-10

    def test_elliptic_case_rejected(self):
        with pytest.raises(nm.NoStableExponent):
            nm.monodromy_oracle(1.0, 0.0)

    def test_halved_tolerance_stability(self):
        lam1 = nm.monodromy_oracle(MAIN["a"], MAIN["b"], tol=1e-12)
        lam2 = nm.monodromy_oracle(MAIN["a"], MAIN["b"], tol=5e-13)
        assert abs(lam1 - lam2) < 1e-10


class TestFloquetEig:
    def test_agrees_with_oracle(self):
        lam, v1, v2 = nm.floquet_eig(MAIN["a"], MAIN["b"], 32)
        assert abs(lam - nm.monodromy_oracle(MAIN["a"], MAIN["b"])) < 1e-8

    def test_decoupled_limit(self):
        # b = 0, a < 0: the m = 0 block contributes lambda = -sqrt(-a)
        a = -2.25
        K = 2 * 6 + 1
        ms = np.arange(-6, 7)
        E = np.block([[-np.diag(1j * ms), np.eye(K)],
                      [-a * np.eye(K), -np.diag(1j * ms)]])
        ev = np.linalg.eigvals(E)
        assert np.min(np.abs(ev - (-np.sqrt(-a)))) < 1e-10

    def test_symmetry_exact(self):
        lam, v1, v2 = nm.floquet_eig(MAIN["a"], MAIN["b"], 16)
        assert np.array_equal(v1, np.conj(v1[::-1]))
        assert np.array_equal(v2, np.conj(v2[::-1]))

    def test_phase_scaling(self):
        lam, v1, v2 = nm.floquet_eig(MAIN["a"], MAIN["b"], 16, l=0.5)
        assert abs(np.sum(v1).real - 0.5) < 1e-12


class TestBundleNewton:
    def setup_method(self):
        self.lam, self.v1, self.v2 = nm.floquet_eig(MAIN["a"], MAIN["b"], 24)

    def test_converges_below_tol(self):
        lam, v1, v2, res = nm.newton_refine_bundle(
            MAIN["a"], MAIN["b"], self.lam, self.v1, self.v2, NU, 0.5)
        assert res <= 1e-13

    def test_fixed_point_unchanged(self):
        lam, v1, v2, _ = nm.newton_refine_bundle(
            MAIN["a"], MAIN["b"], self.lam, self.v1, self.v2, NU, 0.5)
        lam2, u1, u2, res2 = nm.newton_refine_bundle(
            MAIN["a"], MAIN["b"], lam, v1, v2, NU, 0.5)
        assert res2 <= 1e-13 and abs(lam2 - lam) < 1e-14

    def test_basin_reconvergence(self):
        lam, v1, v2, _ = nm.newton_refine_bundle(
            MAIN["a"], MAIN["b"], self.lam, self.v1, self.v2, NU, 0.5)
        pert = v1 + 1e-6 * (RNG.normal(size=v1.size))
        pert = (pert + np.conj(pert[::-1])) / 2
        lam3, u1, u2, res3 = nm.newton_refine_bundle(
            MAIN["a"], MAIN["b"], lam + 1e-6, pert, v2, NU, 0.5)
        assert res3 <= 1e-13


class TestDFvsFiniteDifference:
    def test_bundle_directional(self):
        lam, v1, v2 = nm.floquet_eig(MAIN["a"], MAIN["b"], 10)
        a, b = MAIN["a"], MAIN["b"]
        K = v1.size
        M = (K - 1) // 2
        ms = np.arange(-M, M + 1)
        G = nm.gamma3_band(M, M)

        def F(x):
            lm, u1, u2 = x[0], x[1:1 + K], x[1 + K:]
            return np.concatenate([
                [np.sum(u1) - 0.5],
                (1j * ms + lm) * u1 - u2,
                (1j * ms + lm) * u2 + a * u1 - b * (G @ u1)])

        x0 = np.concatenate([[complex(lam)], v1, v2])
        J = nm.bundle_DF(a, b, lam, v1, v2)
        for _ in range(100):
            d = RNG.normal(size=x0.size) + 1j * RNG.normal(size=x0.size)
            d /= np.linalg.norm(d)
            h = 1e-7
            fd = (F(x0 + h * d) - F(x0 - h * d)) / (2 * h)
            assert np.max(np.abs(J @ d - fd)) < 1e-6

    def test_bvp_directional(self):
        a, b, c = MAIN["a"], MAIN["b"], MAIN["c"]
        lam, v1, v2 = nm.floquet_eig(a, b, 12)
        w1, w2 = nm.homological_recursion(a, b, c, lam, v1, v2, 8)
        MC = 10
        kappa = (1 + 2 * np.pi) / 2
        theta = 1.0
        sigma = 0.4
        s = RNG.normal(size=(4, MC + 1)) * 0.1

        def F(x):
            prm, rows = nm.bvp_residual(a, b, c, kappa, x[0], x[1:].reshape(4, MC + 1),
                                        w1, w2, theta)
            return np.concatenate([[prm], rows[:, :MC + 1].ravel()])

        x0 = np.concatenate([[sigma], s.ravel()])
        J = nm.bvp_DF(a, b, c, kappa, sigma, s, w1, w2, theta)
        for _ in range(100):
            d = RNG.normal(size=x0.size)
            d /= np.linalg.norm(d)
            h = 1e-7
            fd = (F(x0 + h * d) - F(x0 - h * d)) / (2 * h)
            assert np.max(np.abs(J @ d - fd)) < 1e-6


class TestRecursion:
    def test_zero_forcing_gives_zero_orders(self):
        lam, v1, v2 = nm.floquet_eig(1.0, 0.0001, 8)
        w1, w2 = nm.homological_recursion(1.0, 0.0, 0.0, lam, v1, v2, 6)
        assert np.all(w1[2:] == 0) and np.all(w2[2:] == 0)

    def test_truncated_residual_roundoff(self):
        a, b, c = MAIN["a"], MAIN["b"], MAIN["c"]
        lam, v1, v2 = nm.floquet_eig(a, b, 20)
        lam, v1, v2, _ = nm.newton_refine_bundle(a, b, lam, v1, v2, NU, 0.5)
        w1, w2 = nm.homological_recursion(a, b, c, lam, v1, v2, 16)
        assert nm.manifold_residual_norm(a, b, c, lam, w1, w2, NU) < 1e-13

    def test_matches_independent_dense_solve(self):
        # order-2 system solved directly from its defining relations
        a, b, c = MAIN["a"], MAIN["b"], MAIN["c"]
        lam, v1, v2 = nm.floquet_eig(a, b, 10)
        w1, w2 = nm.homological_recursion(a, b, c, lam, v1, v2, 3)
        K = v1.size
        M = 10
        ms = np.arange(-M, M + 1)
        G = nm.gamma3_band(M, M)
        cub = np.convolve(np.convolve(v1, v1), v1)[2 * M:4 * M + 1]
        A2 = np.block([[np.diag(1j * ms + 3 * lam), -np.eye(K)],
                       [a * np.eye(K) - b * G, np.diag(1j * ms + 3 * lam)]])
        ref = np.linalg.solve(A2, np.concatenate([np.zeros(K), c * cub]))
        assert np.max(np.abs(ref[:K] - w1[3])) < 1e-10


class TestConservation:
    def test_H_constant_along_trajectories(self):
        a, b, c = MAIN["a"], MAIN["b"], MAIN["c"]
        for _ in range(100):
            u0 = [RNG.normal() * 0.2, RNG.normal() * 0.2,
                  np.cos(2 * RNG.normal()), -2 * np.sin(2 * RNG.normal())]
            u0[3] = float(-2 * np.sin(np.arccos(np.clip(u0[2], -1, 1))))
            sol = nm.integrate_orbit(a, b, c, u0, (0.0, np.pi))
            H0 = nm.conserved_H(u0)
            H1 = nm.conserved_H(sol.y[:, -1])
            assert abs(H1 - H0) < 1e-9

    def test_H_on_periodic_orbit(self):
        u0 = [0.0, 0.0, 1.0, 0.0]
        assert nm.conserved_H(u0) == 2.0


class TestCheb:
    def test_constant_trajectory(self):
        s = nm.cheb_interpolate(lambda t: np.full_like(np.asarray(t, dtype=float), 2.5), 8)
        assert abs(s[0] - 2.5) < 1e-14 and np.max(np.abs(s[1:])) < 1e-14

    def test_linear_is_t_over_two(self):
        s = nm.cheb_interpolate(lambda t: np.asarray(t, dtype=float), 8)
        assert abs(s[1] - 0.5) < 1e-14
        assert abs(s[0]) < 1e-15 and np.max(np.abs(s[2:])) < 1e-14


class TestApproxInverse:
    def test_identity(self):
        assert np.allclose(nm.approx_inverse(np.eye(4)), np.eye(4))

    def test_diagonal(self):
        out = nm.approx_inverse(np.diag([2.0, 4.0]))
        assert np.allclose(out, np.diag([0.5, 0.25]))

    def test_random_residual(self):
        A = RNG.normal(size=(50, 50)) + 50 * np.eye(50)
        Ainv = nm.approx_inverse(A)
        assert np.max(np.abs(A @ Ainv - np.eye(50))) < 1e-10

    def test_singular_rejected(self):
        with pytest.raises(np.linalg.LinAlgError):
            nm.approx_inverse(np.array([[1.0, 1.0], [1.0, 1.0]]))
