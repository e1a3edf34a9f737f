import numpy as np
import pytest

from gapsol.intervals import Interval, IntervalError
from gapsol.seqspace import (
    ChebSeq,
    FourierSeq,
    IndexRange,
    TaylorFourierSeq,
    conv_cheb,
    conv_fourier,
    conv_tf,
    eval_cheb,
    eval_cheb_pm1,
    project,
    support_lemma_check,
)

RNG = np.random.default_rng(20240817)
NU = 1.05


def rand_fourier(M, nu=NU, scale=1.0):
    c = scale * (RNG.normal(size=2 * M + 1) + 1j * RNG.normal(size=2 * M + 1))
    return FourierSeq.from_complex(c, nu)


def rand_cheb(M, omega=NU, scale=1.0):
    return ChebSeq.from_real(scale * RNG.normal(size=M + 1), omega)


def rand_tf(N, M, nu=NU, scale=1.0):
    c = scale * (RNG.normal(size=(N + 1, 2 * M + 1))
                 + 1j * RNG.normal(size=(N + 1, 2 * M + 1)))
    return TaylorFourierSeq.from_complex(c, nu)


def overlap_c(a, b, tol=0.0):
    """Interval arrays intersect entrywise (within tol)."""
    return (np.all(a.re.lo <= b.re.hi + tol) and np.all(b.re.lo <= a.re.hi + tol)
            and np.all(a.im.lo <= b.im.hi + tol) and np.all(b.im.lo <= a.im.hi + tol))


class TestConvFourier:
    def test_delta_is_identity(self):
        p = rand_fourier(5)
        d = FourierSeq.delta(NU)
        out = conv_fourier(d, p)
        assert np.allclose(out.coeffs.re.lo, p.coeffs.re.lo)
        assert np.allclose(out.coeffs.im.hi, p.coeffs.im.hi)

    def test_cos2_squared_double_angle(self):
        # cos^2(2t) = 1/2 + cos(4t)/2
        g = FourierSeq.cos2(NU)
        out = conv_fourier(g, g)
        assert 0.5 in out[0].re and 0.25 in out[4].re and 0.25 in out[-4].re
        assert out[1].mag_upper() == 0.0 and out[3].mag_upper() == 0.0

    def test_matches_double_loop_oracle(self):
        for _ in range(100):
            Mp, Mq = int(RNG.integers(0, 5)), int(RNG.integers(0, 5))
            p, q = rand_fourier(Mp), rand_fourier(Mq)
            out = conv_fourier(p, q)
            pm = 0.5 * (p.coeffs.re.lo + p.coeffs.re.hi) + 1j * p.coeffs.im.lo
            qm = 0.5 * (q.coeffs.re.lo + q.coeffs.re.hi) + 1j * q.coeffs.im.lo
            for i, m in enumerate(out.modes()):
                acc = 0.0 + 0.0j
                for i1, m1 in enumerate(p.modes()):
                    m2 = m - m1
                    if abs(m2) <= Mq:
                        acc += pm[i1] * qm[m2 + Mq]
                v = out.coeffs.interval(i)
                assert acc.real in Interval(v.re.lo - 1e-12, v.re.hi + 1e-12)
                assert acc.imag in Interval(v.im.lo - 1e-12, v.im.hi + 1e-12)

    def test_weight_mismatch_rejected(self):
        with pytest.raises(IntervalError):
            conv_fourier(rand_fourier(2, 1.05), rand_fourier(2, 1.1))

    def test_commutative_associative(self):
        for _ in range(100):
            p, q, r = rand_fourier(3), rand_fourier(3), rand_fourier(2)
            pq = conv_fourier(p, q)
            qp = conv_fourier(q, p)
            assert overlap_c(pq.coeffs, qp.coeffs)
            lhs = conv_fourier(pq, r)
            rhs = conv_fourier(p, conv_fourier(q, r))
            assert overlap_c(lhs.coeffs, rhs.coeffs, tol=1e-13)

    def test_banach_algebra(self):
        for _ in range(100):
            p, q = rand_fourier(int(RNG.integers(0, 6))), rand_fourier(int(RNG.integers(0, 6)))
            lhs = conv_fourier(p, q).norm().hi
            rhs = (p.norm() * q.norm()).hi
            assert lhs <= rhs * (1 + 1e-12) + 1e-300

    def test_conjugate_symmetry_preserved(self):
        # exact symmetry of point inputs; interval outputs must overlap
        # their own conjugate flip (both enclose the symmetric truth)
        for _ in range(20):
            c = RNG.normal(size=9) + 1j * RNG.normal(size=9)
            c = c + np.conj(c[::-1])
            d = RNG.normal(size=7) + 1j * RNG.normal(size=7)
            d = d + np.conj(d[::-1])
            ps = FourierSeq.from_complex(c, NU)
            qs = FourierSeq.from_complex(d, NU)
            assert ps.is_conjugate_symmetric() and qs.is_conjugate_symmetric()
            out = conv_fourier(ps, qs)
            flip = out.conj_flip()
            assert overlap_c(out.coeffs, flip.coeffs)
            out2 = out.scale(2.5)
            assert overlap_c(out2.coeffs, out2.conj_flip().coeffs)


class TestConvTF:
    def test_taylor_delta_identity(self):
        q = rand_tf(3, 4)
        d = TaylorFourierSeq.zeros(0, 0, NU)
        d.coeffs[0, 0] = 1.0 + 0.0j
        out = conv_tf(d, q)
        assert overlap_c(out.coeffs, q.coeffs)

    def test_degree_additivity(self):
        p = TaylorFourierSeq.zeros(1, 2, NU)
        p.coeffs[1, 0] = 2.0 + 0.0j
        q = TaylorFourierSeq.zeros(1, 2, NU)
        q.coeffs[1, 3] = 1.0 - 1.0j
        out = conv_tf(p, q)
        mags = out.coeffs.mag_upper()
        assert np.all(mags[0] == 0) and np.all(mags[1] == 0)
        assert np.any(mags[2] > 0)

    def test_matches_double_loop_oracle(self):
        for _ in range(100):
            N1, N2 = int(RNG.integers(0, 3)), int(RNG.integers(0, 3))
            M1, M2 = int(RNG.integers(0, 3)), int(RNG.integers(0, 3))
            p, q = rand_tf(N1, M1), rand_tf(N2, M2)
            out = conv_tf(p, q)
            pm = p.coeffs.re.lo + 1j * p.coeffs.im.lo
            qm = q.coeffs.re.lo + 1j * q.coeffs.im.lo
            ref = np.zeros((N1 + N2 + 1, 2 * (M1 + M2) + 1), dtype=complex)
            for n1 in range(N1 + 1):
                for n2 in range(N2 + 1):
                    for i1 in range(2 * M1 + 1):
                        for i2 in range(2 * M2 + 1):
                            ref[n1 + n2, i1 + i2] += pm[n1, i1] * qm[n2, i2]
            assert np.all(np.abs(ref.real - 0.5 * (out.coeffs.re.lo + out.coeffs.re.hi)) <= 1e-12)
            assert np.all(out.coeffs.re.lo - 1e-12 <= ref.real)
            assert np.all(ref.real <= out.coeffs.re.hi + 1e-12)

    def test_banach_algebra(self):
        for _ in range(100):
            p, q = rand_tf(2, 3, scale=0.5), rand_tf(3, 2, scale=0.5)
            assert conv_tf(p, q).norm().hi <= (p.norm() * q.norm()).hi * (1 + 1e-12)


class TestConvCheb:
    def test_t0_identity(self):
        q = rand_cheb(5)
        one = ChebSeq.from_real([1.0], NU)
        out = conv_cheb(one, q)
        assert np.allclose(out.coeffs.lo, q.coeffs.lo)

    def test_t1_squared(self):
        # t*t: with the factor-2 convention t = (0, 1/2); the product is
        # t^2 = 1/2 + T_2/2, i.e. coefficients (1/2, 0, 1/4)
        t = ChebSeq.from_real([0.0, 0.5], NU)
        out = conv_cheb(t, t)
        assert 0.5 in out[0] and 0.0 in out[1] and 0.25 in out[2]

    def test_function_space_oracle(self):
        # reconstruction of the convolution equals product of reconstructions
        for _ in range(100):
            p, q = rand_cheb(int(RNG.integers(0, 6))), rand_cheb(int(RNG.integers(0, 6)))
            out = conv_cheb(p, q)
            ts = np.linspace(-1, 1, 20)
            for t in ts:
                def val(s):
                    tv = np.polynomial.chebyshev.chebval(t, np.concatenate(
                        [[s.coeffs.lo[0]], 2 * 0.5 * (s.coeffs.lo[1:] + s.coeffs.hi[1:])]))
                    return tv
                pv = val(p)
                qv = val(q)
                ov = val(out)
                assert abs(ov - pv * qv) < 1e-9

    def test_banach_algebra(self):
        for _ in range(100):
            p, q = rand_cheb(int(RNG.integers(0, 7))), rand_cheb(int(RNG.integers(0, 7)))
            assert conv_cheb(p, q).norm().hi <= (p.norm() * q.norm()).hi * (1 + 1e-12)


class TestNorms:
    def test_zero_norm(self):
        assert FourierSeq.zeros(3, NU).norm().hi == 0.0

    def test_cos2_norm_is_nu_squared(self):
        n = FourierSeq.cos2(1.05).norm()
        ref = Interval.point(1.05) * 1.05
        assert n.lo <= ref.hi and ref.lo <= n.hi
        assert abs(n.hi - 1.1025) < 1e-12

    def test_cheb_direct_sum(self):
        s = ChebSeq.from_real([1.0, 1.0], 2.0)
        n = s.norm()
        assert abs(n.hi - 5.0) < 1e-12

    def test_tf_norm_sums_orders(self):
        w = rand_tf(2, 2)
        total = sum((w.order(n).norm().hi for n in range(3)))
        assert w.norm().hi <= total * (1 + 1e-12)
        assert w.norm().lo <= total


class TestProject:
    def test_idempotent(self):
        s = rand_fourier(6)
        r = IndexRange.closed("fourier", 2, 4)
        once = project(s, r)
        twice = project(once, r)
        assert np.array_equal(once.coeffs.re.lo, twice.coeffs.re.lo)

    def test_partition_of_unity(self):
        s = rand_fourier(6)
        inner = project(s, IndexRange.closed("fourier", 0, 3))
        outer = project(s, IndexRange.above("fourier", 3))
        back = inner + outer
        # containment: outward-rounded addition may widen but never lose s
        assert np.all(back.coeffs.re.lo <= s.coeffs.re.lo)
        assert np.all(back.coeffs.re.hi >= s.coeffs.re.hi)
        assert np.all(back.coeffs.re.hi - back.coeffs.re.lo <= 4e-15 * np.maximum(1, np.abs(s.coeffs.re.hi)))

    def test_disjoint_support_projects_to_zero(self):
        g = FourierSeq.cos2(NU)
        out = project(g, IndexRange.closed("fourier", 0, 1))
        assert np.all(out.coeffs.mag_upper() == 0.0)


class TestEvalCheb:
    def test_constant(self):
        s = ChebSeq.from_real([3.25], NU)
        assert 3.25 in eval_cheb(s, Interval.point(0.37))

    def test_t1_at_one(self):
        s = ChebSeq.from_real([0.0, 1.0], NU)
        assert 2.0 in eval_cheb_pm1(s, 1)

    def test_matches_recurrence_oracle(self):
        for _ in range(50):
            s = rand_cheb(7)
            t = float(RNG.uniform(-1, 1))
            # direct three-term recurrence in plain floats
            mid = s.coeffs.lo
            T_prev, T_cur = 1.0, t
            acc = mid[0]
            for m in range(1, 8):
                acc += 2 * mid[m] * T_cur
                T_prev, T_cur = T_cur, 2 * t * T_cur - T_prev
            v = eval_cheb(s, Interval.point(t))
            assert acc in Interval(v.lo - 1e-10, v.hi + 1e-10)

    def test_outside_domain_rejected(self):
        with pytest.raises(IntervalError):
            eval_cheb(rand_cheb(3), Interval.point(1.5))


class TestSupportLemma:
    def test_cos2_against_far_tail(self):
        g = FourierSeq.cos2(NU)  # supported at |m| = 2, M = 2
        q = FourierSeq.zeros(8, NU)
        q.coeffs[0] = 1.0 + 0.5j   # mode -8
        q.coeffs[16] = -2.0 + 0.0j  # mode +8
        assert support_lemma_check(g, q, 2)

    def test_finite_times_finite(self):
        p = FourierSeq.cos2(NU)
        q = rand_fourier(2)
        assert support_lemma_check(p, q, 2)

    def test_random_instances(self):
        for _ in range(100):
            M = int(RNG.integers(1, 5))
            p = rand_fourier(M)
            far = FourierSeq.zeros(3 * M + 1, NU)
            far.coeffs[0] = complex(RNG.normal(), RNG.normal())
            far.coeffs[-1] = complex(RNG.normal(), RNG.normal())
            assert support_lemma_check(p, far, M)


class TestWeights:
    def test_weight_below_one_rejected(self):
        with pytest.raises(IntervalError):
            FourierSeq.zeros(2, 0.9)
        with pytest.raises(IntervalError):
            ChebSeq.zeros(2, 0.99)
