"""Certified gap solitons of the 1-D Gross-Pitaevskii equation.

Three-stage interval-arithmetic Newton-Kantorovich validation:
a Floquet stable bundle of the lattice periodic orbit, a Taylor-Fourier
parameterization of its stable manifold, and a Chebyshev boundary-value
problem connecting an even initial condition to that manifold. Each
stage emits a machine-checkable certificate with explicit error bounds.
"""

from .intervals import (
    Interval,
    ComplexInterval,
    IntervalError,
    IntervalDivisionError,
    parse_decimal,
    sqrt_lower,
    mag_upper,
    PI,
)
from .certify import KBounds, RadiiResult, radii_from_bounds, nk_selftest


def __getattr__(name):
    # pipeline pulls in the full stage stack; load it lazily
    if name in ("RunConfig", "ProofBundle", "prove_all"):
        from . import pipeline

        return getattr(pipeline, name)
    raise AttributeError(name)

__version__ = "0.1.0"

__all__ = [
    "Interval",
    "ComplexInterval",
    "IntervalError",
    "IntervalDivisionError",
    "parse_decimal",
    "sqrt_lower",
    "mag_upper",
    "PI",
    "KBounds",
    "RadiiResult",
    "radii_from_bounds",
    "nk_selftest",
    "RunConfig",
    "ProofBundle",
    "prove_all",
    "__version__",
]
