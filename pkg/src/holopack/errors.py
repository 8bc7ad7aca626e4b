"""Exception hierarchy shared by every module.

Each error class name doubles as the error name the CLI reports, so the
names are part of the public interface.
"""

from __future__ import annotations


class HolopackError(Exception):
    """Base class for all module errors."""

    @property
    def name(self) -> str:
        return type(self).__name__


# geometry
class ZeroLift(HolopackError):
    pass


class ChartOverflow(HolopackError):
    pass


class NonpositiveScale(HolopackError):
    pass


class InvalidNormalization(HolopackError):
    pass


# curves
class PoleAtLatticePoint(HolopackError):
    pass


class TruncationTooLoose(HolopackError):
    pass


class NotPeriodic(HolopackError):
    pass


class InvalidCurve(HolopackError):
    pass


# theta
class WindowExceeded(HolopackError):
    pass


class InvalidThetaParams(HolopackError):
    pass


# density
class QuadratureDiverged(HolopackError):
    pass


class ConstantCurve(HolopackError):
    pass


# coeff_bounds
class NotVanishingAtOrigin(HolopackError):
    pass


class InvalidChainParams(HolopackError):
    pass


class StepFailed(HolopackError):
    """An inequality of the constant chain does not hold.

    ``step`` names the first failing inequality and ``report`` carries the
    records evaluated up to and including it.
    """

    def __init__(self, step: str, report=None):
        super().__init__(f"step {step!r} does not hold")
        self.step = step
        self.report = report


# nevanlinna
class NodeLimit(HolopackError):
    pass


class ZeroOnCircle(HolopackError):
    pass


class DegreeZero(HolopackError):
    pass


class ZeroLeadingCoefficient(HolopackError):
    pass


class SingularMatrix(HolopackError):
    pass


# cli
class ConfigError(HolopackError):
    """Config document could not be parsed or violates the schema."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        loc = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(message + loc)
        self.line = line
        self.column = column
