"""Exception hierarchy shared by all modules.

CLI exit codes are derived from these classes: config errors map to 2,
degeneracies to 3, precision exhaustion to 4.
"""


class CauchyLatticeError(Exception):
    """Base class for all library errors."""


class ModeError(CauchyLatticeError):
    """An operation was requested in an arithmetic mode that cannot support it."""


class DomainError(CauchyLatticeError):
    """Argument outside the mathematical domain (e.g. gamma at x <= 0)."""


class ShapeError(CauchyLatticeError):
    """Matrix shape mismatch or non-square input to a determinant."""


class RangeError(CauchyLatticeError):
    """Requested index outside the populated table range (tables never auto-extend)."""


class DegeneracyError(CauchyLatticeError):
    """A tau-function or normalisation denominator vanished."""

    def __init__(self, message, site=None):
        super().__init__(message)
        self.site = site


class PrecisionError(CauchyLatticeError):
    """Estimated correct digits fell below the reliability threshold."""

    def __init__(self, message, digits_lost=None):
        super().__init__(message)
        self.digits_lost = digits_lost


class QuadratureError(CauchyLatticeError):
    """Quadrature failed to converge within the escalation budget."""


class ConfigError(CauchyLatticeError):
    """Invalid or unparseable run configuration."""
