"""Exception hierarchy shared across the lab."""


class LabError(Exception):
    """Base class for all errors raised by birlab."""


class AllZero(LabError):
    """Every homogeneous coordinate is numerically zero."""


class ChartSingular(LabError):
    """The requested affine chart is singular at this point."""


class IndeterminacyProximity(LabError):
    """A point is numerically on an indeterminacy set.

    ``step`` is the orbit index at which the failure occurred (0 for a
    single evaluation).
    """

    def __init__(self, message, step=0):
        super().__init__(message)
        self.step = step


class DimensionMismatch(LabError):
    """Operation only defined for the plane (k = 2)."""


class InvalidParam(LabError):
    """A constructor or operation received an out-of-range parameter."""


class NonConvergence(LabError):
    """An iterative computation resolved neither escape nor boundedness."""


class DegenerateCloud(LabError):
    """Importance weights collapsed; the cloud cannot support estimation."""


class InsufficientSignal(LabError):
    """Too few series entries above the noise floor to fit a rate."""


class ShiftCalibrationError(LabError):
    """A quasi-potential value violated the calibrated domain condition."""


class ConfigInvalid(LabError):
    """An experiment config failed schema validation."""
