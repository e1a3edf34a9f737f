import math

import numpy as np
import pytest

from gapsol.certify import KBounds, RadiiResult, nk_selftest, radii_from_bounds

# the published stage-1 triple, fed in verbatim
PAPER_Y = 2.6879100002352747e-13
PAPER_Z1 = 0.3465291783592818
PAPER_Z2 = 14.980732463866438
PAPER_R = 4.122891017172993e-13


class TestRadii:
    def test_exact_root_case(self):
        res = radii_from_bounds(KBounds(Y=0.0, Z1=0.5, Z2=1.0))
        assert res.feasible and res.r_min == 0.0

    def test_reproduces_published_radius(self):
        res = radii_from_bounds(KBounds(Y=PAPER_Y, Z1=PAPER_Z1, Z2=PAPER_Z2))
        assert res.feasible
        # agreement with the 5-digit published value at its displayed scale
        assert abs(res.r_min - PAPER_R) <= 1e-15
        # and exact-arithmetic agreement of our own evaluation
        import mpmath
        with mpmath.workprec(150):
            Y, Z1, Z2 = map(mpmath.mpf, (repr(PAPER_Y), repr(PAPER_Z1), repr(PAPER_Z2)))
            ref = (1 - Z1 - mpmath.sqrt((1 - Z1) ** 2 - 2 * Y * Z2)) / Z2
            assert abs(res.r_min - float(ref)) <= 1e-25
            assert res.r_min >= float(ref) - 1e-30  # outward rounding never shrinks

    def test_contraction_failure_infeasible(self):
        res = radii_from_bounds(KBounds(Y=1e-10, Z1=1.0, Z2=1.0))
        assert not res.feasible and "Z1" in res.reason

    def test_discriminant_failure_named(self):
        res = radii_from_bounds(KBounds(Y=1.0, Z1=0.5, Z2=10.0))
        assert not res.feasible and "Z2" in res.reason

    def test_r_star_caps_window(self):
        res = radii_from_bounds(KBounds(Y=1e-8, Z1=0.5, Z2=1.0, r_star=1e-9))
        assert not res.feasible  # r_min ~ 2e-8 > r_star

    def test_monotone_in_Y(self):
        rs = [radii_from_bounds(KBounds(Y=y, Z1=0.3, Z2=5.0)).r_min
              for y in (1e-12, 1e-10, 1e-8)]
        assert rs[0] <= rs[1] <= rs[2]

    def test_quadratic_membership(self):
        # r_min^2 Z2/2 - (1-Z1) r_min + Y <= 0 at the returned radius
        rng = np.random.default_rng(5)
        for _ in range(200):
            Y = 10.0 ** rng.uniform(-14, -2)
            Z1 = rng.uniform(0.0, 0.95)
            Z2 = 10.0 ** rng.uniform(-2, 3)
            res = radii_from_bounds(KBounds(Y=Y, Z1=Z1, Z2=Z2))
            if not res.feasible:
                continue
            r = res.r_min
            val = r * r * Z2 / 2 - (1 - Z1) * r + Y
            assert val <= 1e-16 + 1e-10 * Y

    def test_negative_bounds_rejected(self):
        with pytest.raises(ValueError):
            KBounds(Y=-1.0, Z1=0.0, Z2=0.0)


class TestSelfTest:
    def test_validates_sqrt2(self):
        rep = nk_selftest()
        assert rep["contains_sqrt2"]
        assert rep["ball"][0] <= math.sqrt(2) <= rep["ball"][1]

    def test_looser_center_still_validates(self):
        # rerun the engine by hand at a worse center
        from gapsol.intervals import Interval
        x0 = Interval.point(1.4)
        A = (2.0 * x0).reciprocal()
        Y = (A * (x0.sq() - 2.0)).mag()
        Z1 = (1.0 - A * 2.0 * x0).mag()
        Z2 = (2.0 * A).mag()
        res = radii_from_bounds(KBounds(Y=Y, Z1=Z1, Z2=Z2))
        assert res.feasible
        assert res.r_min > radii_from_bounds(
            KBounds(Y=2.7e-13, Z1=0.35, Z2=15.0)).r_min

    def test_zero_preconditioner_infeasible(self):
        res = radii_from_bounds(KBounds(Y=0.0, Z1=1.0, Z2=0.0))
        assert not res.feasible
