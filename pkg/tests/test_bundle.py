import numpy as np
import pytest

from gapsol import numerics as nm
from gapsol.bundle import (
    BundleCandidate,
    BundleProblem,
    F_bundle,
    compute_candidate,
    validate_bundle,
)
from gapsol.intervals import Interval, parse_decimal
from gapsol.seqspace import weight_powers

RNG = np.random.default_rng(99)


def main_problem(M=32):
    return BundleProblem(a=parse_decimal("1.1025"), b=parse_decimal("0.55125"),
                         c=parse_decimal("-0.826875"), nu=1.05, l=0.5, M=M)


def resid_norm(phase, r1, r2, nu):
    M = (r1.shape[-1] - 1) // 2
    w = weight_powers(nu, M).hi[np.abs(np.arange(-M, M + 1))]
    return max(phase.mag_upper(),
               float(np.sum(r1.mag_upper() * w)),
               float(np.sum(r2.mag_upper() * w)))


@pytest.fixture(scope="module")
def main_cert():
    prob = main_problem()
    cand = compute_candidate(prob)
    return validate_bundle(cand, prob), cand, prob


class TestMap:
    def test_zero_candidate_residual(self):
        prob = main_problem(M=4)
        cand = BundleCandidate(lam=-1.0, v1=np.zeros(9, complex), v2=np.zeros(9, complex))
        phase, r1, r2 = F_bundle(cand, prob)
        assert -0.5 in phase.re  # -(l)
        assert np.all(r1.mag_upper() == 0.0) and np.all(r2.mag_upper() == 0.0)

    def test_phase_row_exact_after_scaling(self):
        prob = main_problem(M=16)
        cand = compute_candidate(prob)
        phase, _, _ = F_bundle(cand, prob)
        assert phase.mag_upper() < 1e-13

    def test_conjugation_equivariance(self):
        # flip(F(x)) == F(flip(x)) coefficientwise (enclosures overlap)
        prob = main_problem(M=6)
        for _ in range(100):
            v1 = RNG.normal(size=13) + 1j * RNG.normal(size=13)
            v2 = RNG.normal(size=13) + 1j * RNG.normal(size=13)
            lam = -abs(RNG.normal())
            _, r1a, r2a = F_bundle(BundleCandidate(lam, v1, v2), prob)
            fv1 = np.conj(v1[::-1])
            fv2 = np.conj(v2[::-1])
            _, r1b, r2b = F_bundle(BundleCandidate(lam, fv1, fv2), prob)
            for ra, rb in ((r1a, r1b), (r2a, r2b)):
                flip_lo = np.conj(rb.re.hi[::-1] + 1j * rb.im.hi[::-1])
                # overlap of ra with the conjugate flip of rb
                assert np.all(ra.re.lo <= rb.re.hi[::-1] + 1e-14)
                assert np.all(rb.re.lo[::-1] <= ra.re.hi + 1e-14)
                assert np.all(ra.im.lo <= -rb.im.lo[::-1] + 1e-14)
                assert np.all(-rb.im.hi[::-1] <= ra.im.hi + 1e-14)

    def test_residual_meets_refinement_target(self):
        prob = main_problem()
        cand = compute_candidate(prob)
        phase, r1, r2 = F_bundle(cand, prob)
        assert resid_norm(phase, r1, r2, prob.nu) <= 1e-13


class TestValidation:
    def test_main_parameters_proved(self, main_cert):
        cert, cand, prob = main_cert
        assert cert.proved
        assert cert.Y <= 1e-12
        assert cert.Z1 < 0.5
        assert 5.0 <= cert.Z2 <= 50.0
        assert cert.r_F <= 1e-12
        assert cert.lam_interval.hi < 0.0

    def test_z2_matches_published_value(self, main_cert):
        # the published Z2 = 2 max(||A_f||, tail) for the same candidate
        cert, _, _ = main_cert
        assert abs(cert.Z2 - 14.980732463866438) < 1e-9

    def test_oracle_in_validated_interval(self, main_cert):
        cert, _, prob = main_cert
        lam_star = nm.monodromy_oracle(prob.a.mid, prob.b.mid)
        assert (cert.lam_interval.lo - 1e-8 <= lam_star
                <= cert.lam_interval.hi + 1e-8)

    def test_positive_lambda_rejected(self):
        prob = main_problem(M=4)
        cand = BundleCandidate(lam=0.5, v1=np.zeros(9, complex), v2=np.zeros(9, complex))
        with pytest.raises(ValueError):
            validate_bundle(cand, prob)

    def test_asymmetric_candidate_rejected(self):
        prob = main_problem(M=4)
        v1 = np.zeros(9, complex)
        v1[0] = 1.0 + 1.0j
        cand = BundleCandidate(lam=-0.5, v1=v1, v2=np.zeros(9, complex))
        with pytest.raises(ValueError):
            validate_bundle(cand, prob)

    def test_soundness_fuzz_ball(self, main_cert):
        # interval residual at points inside the ball stays consistent
        # with ||DF|| * r_F scales (sanity, not a proof step)
        cert, cand, prob = main_cert
        for _ in range(5):
            d = RNG.normal(size=cand.v1.size) + 1j * RNG.normal(size=cand.v1.size)
            d = (d + np.conj(d[::-1])) / 2
            d *= cert.r_F / (np.sum(np.abs(d)) + 1e-300)
            pert = BundleCandidate(cand.lam, cand.v1 + d, cand.v2)
            phase, r1, r2 = F_bundle(pert, prob)
            assert resid_norm(phase, r1, r2, prob.nu) <= 1e-13 + 100 * cert.r_F

    def test_second_parameter_set_proved(self):
        prob = BundleProblem(a=parse_decimal("1"), b=parse_decimal("-1"),
                             c=parse_decimal("1"), nu=1.05, l=0.5, M=30)
        cert = validate_bundle(compute_candidate(prob), prob)
        assert cert.proved
