"""Two-parameter Cauchy bi-orthogonal polynomials and their integrable lattice.

Library layout:

* ``numerics``   — exact-rational / arbitrary-precision scalar contexts,
  determinant engines, half-line quadrature.
* ``moments``    — bi-moment and single-moment tables with exact shift-rule
  time derivatives.
* ``biorth``     — the polynomial families (determinant, Jacobi-type, hat)
  and their normalisations.
* ``recurrence`` — multi-term recurrence data, spectral operators, and the
  compatibility system of the time flow.
* ``lattice``    — tau-function tower, bilinear/nonlinear lattice residuals,
  ODE evolution.
* ``oracle``     — brute-force matrix-integral quadrature cross-checks.
* ``cli``        — batch front end (``cauchylattice`` command).
"""

__version__ = "1.0.0"

from .errors import (
    CauchyLatticeError,
    ConfigError,
    DegeneracyError,
    DomainError,
    ModeError,
    PrecisionError,
    QuadratureError,
    RangeError,
    ShapeError,
)

__all__ = [
    "CauchyLatticeError",
    "ConfigError",
    "DegeneracyError",
    "DomainError",
    "ModeError",
    "PrecisionError",
    "QuadratureError",
    "RangeError",
    "ShapeError",
    "__version__",
]
