import numpy as np
import pytest

from gapsol.intervals import ComplexInterval, Interval
from gapsol.ivarrays import CIArr, RIArr
from gapsol.operators import (
    CompSpec,
    DiagOpFourier,
    FiniteBlockOp,
    MulOpFourier,
    SpaceSpec,
    TridiagOpCheb,
    opnorm_weighted_l1,
    tail_norm_bounds,
)
from gapsol.seqspace import ChebSeq, FourierSeq, IndexRange, project

RNG = np.random.default_rng(7)
NU = 1.05


def fourier_space(M, ncomp=1, nu=NU, param=False):
    return SpaceSpec(tuple(CompSpec("fourier", nu, M) for _ in range(ncomp)), has_param=param)


def vec_norm_oracle(spec: SpaceSpec, v: np.ndarray) -> float:
    w = spec.weights_hi()
    best = abs(v[0]) if spec.has_param else 0.0
    for sl in spec.comp_slices():
        best = max(best, float(np.sum(np.abs(v[sl]) * w[sl])))
    return best


class TestOpnorm:
    def test_identity_is_isometry(self):
        spec = fourier_space(4, ncomp=2, param=True)
        n = spec.size()
        op = FiniteBlockOp(CIArr.point(np.eye(n)), spec, spec)
        nb = opnorm_weighted_l1(op).hi
        assert 1.0 <= nb <= 1.0 + 1e-10

    def test_diagonal_weights_cancel(self):
        spec = fourier_space(3)
        d = RNG.normal(size=spec.size())
        op = FiniteBlockOp(CIArr.point(np.diag(d)), spec, spec)
        assert abs(opnorm_weighted_l1(op).hi - np.max(np.abs(d))) < 1e-10

    def test_matches_basis_vector_oracle(self):
        # exact for ell-1 type norms on a single component pair
        for _ in range(100):
            M = int(RNG.integers(1, 4))
            spec = fourier_space(M)
            n = spec.size()
            A = RNG.normal(size=(n, n)) + 1j * RNG.normal(size=(n, n))
            op = FiniteBlockOp(CIArr.point(A), spec, spec)
            got = opnorm_weighted_l1(op).hi
            w = spec.weights_hi()
            ref = max(np.sum(np.abs(A[:, j]) * w) / w[j] for j in range(n))
            assert ref <= got <= ref * (1 + 1e-10)

    def test_sound_on_random_vectors(self):
        for _ in range(100):
            M = int(RNG.integers(1, 4))
            spec = SpaceSpec((CompSpec("fourier", NU, M), CompSpec("cheb", 1.02, M)),
                             has_param=True)
            n = spec.size()
            A = RNG.normal(size=(n, n))
            op = FiniteBlockOp(CIArr.point(A), spec, spec)
            bound = opnorm_weighted_l1(op).hi
            v = RNG.normal(size=n)
            nv = vec_norm_oracle(spec, v)
            if nv == 0:
                continue
            assert vec_norm_oracle(spec, A @ v) <= bound * nv * (1 + 1e-9)

    def test_apply_encloses_float_matvec(self):
        spec = fourier_space(2, param=True)
        n = spec.size()
        A = RNG.normal(size=(n, n)) + 1j * RNG.normal(size=(n, n))
        x = RNG.normal(size=n) + 1j * RNG.normal(size=n)
        op = FiniteBlockOp(CIArr.point(A), spec, spec)
        out = op.apply(CIArr.point(x))
        ref = A @ x
        assert np.all(out.re.lo - 1e-12 <= ref.real) and np.all(ref.real <= out.re.hi + 1e-12)
        assert np.all(out.im.lo - 1e-12 <= ref.imag) and np.all(ref.imag <= out.im.hi + 1e-12)


class TestStructuredOps:
    def test_diag_bundle_at_zero_mode(self):
        op = DiagOpFourier(Interval.point(-1.0), "bundle")
        d = FourierSeq.delta(NU, M=2)
        out = op.apply(d)
        assert -1.0 in out[0].re and 0.0 in out[0].im
        assert out[1].mag_upper() == 0.0

    def test_tridiag_single_entry_stencil(self):
        s = ChebSeq.zeros(3, NU)
        s.coeffs[1] = 1.0
        out = TridiagOpCheb.apply(s)
        # [T s]_0 = 0 always; [T s]_2 = -s_1 + s_3 = -1
        assert 0.0 in out[0]
        assert -1.0 in out[2]
        assert out.coeffs.mag()[1] == 0.0

    def test_tridiag_support_shift(self):
        for _ in range(50):
            M = int(RNG.integers(2, 8))
            s = ChebSeq.from_real(RNG.normal(size=M + 1), NU)
            out = TridiagOpCheb.apply(s)
            assert out.M == M + 1
            assert out.coeffs.mag()[0] == 0.0

    def test_tridiag_norm_bound(self):
        # ||T s|| <= 2 omega ||s|| on random unit-normalized sequences
        for _ in range(100):
            M = int(RNG.integers(1, 9))
            s = ChebSeq.from_real(RNG.normal(size=M + 1), NU)
            ns = s.norm().hi
            nt = TridiagOpCheb.apply(s).norm().hi
            assert nt <= 2 * NU * ns * (1 + 1e-10)

    def test_mulop_cos2_shift(self):
        op = MulOpFourier(FourierSeq.cos2(NU), a=Interval(0.0), b=Interval(1.0))
        v = FourierSeq.delta(NU, M=0)
        out = op.apply(v)
        assert 0.5 in out[2].re and 0.5 in out[-2].re
        assert out[0].mag_upper() == 0.0

    def test_diag_project_commutes(self):
        # [0,M]-projection of a diagonal action on a far tail vanishes
        op = DiagOpFourier(Interval.point(-0.5), "bundle")
        M = 3
        far = FourierSeq.zeros(3 * M, NU)
        far.coeffs[0] = 1.0 + 1.0j
        out = project(op.apply(far), IndexRange.closed("fourier", 0, M))
        assert np.all(out.coeffs.mag_upper() == 0.0)


class TestTails:
    def test_floquet_plug_in(self):
        v = tail_norm_bounds("floquet", lam=Interval.point(-1.0), M=3)
        assert abs(v.hi - 1 / np.sqrt(17)) < 1e-12

    def test_cheb_linv(self):
        v = tail_norm_bounds("cheb-linv", M=10)
        assert abs(v.hi - 0.05) < 1e-15

    def test_manifold_taylor(self):
        v = tail_norm_bounds("manifold-taylor", lam=Interval.point(-0.5), N=9)
        assert abs(v.hi - 0.2) < 1e-12

    def test_manifold_fourier(self):
        v = tail_norm_bounds("manifold-fourier", lam=Interval(-0.6, -0.4), M=4)
        # |lam| >= 0.4 -> bound <= 1/sqrt(4*0.16+25)
        assert v.hi >= 1 / np.sqrt(4 * 0.36 + 25) - 1e-12
        assert abs(v.hi - 1 / np.sqrt(4 * 0.16 + 25)) < 1e-10

    def test_lambda_touching_zero_rejected(self):
        from gapsol.intervals import IntervalError
        with pytest.raises(IntervalError):
            tail_norm_bounds("manifold-taylor", lam=Interval(-0.1, 0.0), N=4)
