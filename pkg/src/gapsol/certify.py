"""Stage-agnostic Newton-Kantorovich radii engine.

Consumes rigorous upper bounds Y (residual), Z1 (approximate-inverse
defect) and Z2 (Lipschitz constant of the preconditioned derivative on
the candidate ball) and returns the validated radius window. All
conservatism lives in the bound producers; this module only evaluates
the radii polynomial with outward rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .intervals import Interval


@dataclass(frozen=True)
class KBounds:
    """Upper bounds feeding the contraction argument, plus the ball
    radius r_star at which Z2 was computed."""

    Y: float
    Z1: float
    Z2: float
    r_star: float = math.inf

    def __post_init__(self):
        for name in ("Y", "Z1", "Z2"):
            v = getattr(self, name)
            if not (v >= 0.0):
                raise ValueError(f"{name} must be nonnegative, got {v}")


@dataclass(frozen=True)
class RadiiResult:
    feasible: bool
    r_min: float = math.nan
    r_max: float = math.nan
    reason: str = ""


def radii_from_bounds(b: KBounds) -> RadiiResult:
    """Validated radius window [r_min, r_max) from (Y, Z1, Z2).

    r_min is rounded up and r_max down, so any radius in the returned
    window genuinely satisfies the contraction inequalities. Infeasible
    inputs give a result naming the violated inequality, not an error.
    """
    Y = Interval.point(b.Y)
    Z1 = Interval.point(b.Z1)
    Z2 = Interval.point(b.Z2)
    one_minus = 1.0 - Z1
    if not (one_minus.lo > 0.0):
        return RadiiResult(False, reason=f"Z1 >= 1 (Z1 = {b.Z1})")
    if b.Y == 0.0:
        r_min = 0.0
    else:
        disc = one_minus.sq() - 2.0 * Y * Z2
        if not (disc.lo > 0.0):
            return RadiiResult(
                False, reason=f"Z2 >= (1-Z1)^2/(2Y) "
                              f"(2*Y*Z2 = {(2.0 * Y * Z2).hi}, (1-Z1)^2 = {one_minus.sq().lo})")
        if b.Z2 == 0.0:
            # linear case: Y <= (1-Z1) r
            r_min = (Y / one_minus).hi
        else:
            # stable form of (1-Z1-sqrt(disc))/Z2, no cancellation
            r_min = (2.0 * Y / (one_minus + disc.sqrt())).hi
    r_max = b.r_star if b.Z2 == 0.0 else min((one_minus / Z2).lo, b.r_star)
    if not (r_min < r_max):
        return RadiiResult(False, r_min=r_min, r_max=r_max,
                           reason=f"empty radius window [{r_min}, {r_max})")
    return RadiiResult(True, r_min=r_min, r_max=r_max)


def nk_selftest() -> dict:
    """Engine sanity proof on f(x) = x^2 - 2 around 1.4142135.

    Computes Y, Z1, Z2 rigorously for the scalar problem with the
    preconditioner A = 1/(2 x0) and asserts the validated ball contains
    sqrt(2). Raises AssertionError on any failure.
    """
    x0 = Interval.point(1.4142135)
    A = (2.0 * x0).reciprocal()
    fx0 = x0.sq() - 2.0
    Y = (A * fx0).mag()
    Z1 = (1.0 - A * 2.0 * x0).mag()
    Z2 = (2.0 * A).mag()
    res = radii_from_bounds(KBounds(Y=Y, Z1=Z1, Z2=Z2))
    assert res.feasible, f"self-test infeasible: {res.reason}"
    ball = Interval(x0.lo - res.r_min, x0.hi + res.r_min)
    root = Interval.point(2.0).sqrt()
    assert root.lo in ball and root.hi in ball, "validated ball misses sqrt(2)"
    return {"Y": Y, "Z1": Z1, "Z2": Z2, "r_min": res.r_min,
            "ball": [ball.lo, ball.hi], "contains_sqrt2": True}
