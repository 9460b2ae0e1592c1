"""Exception hierarchy shared by all fockprint modules."""


class FockprintError(Exception):
    """Base class for every error raised by this package."""


class NonSquareError(FockprintError, ValueError):
    pass


class SizeExceededError(FockprintError, ValueError):
    pass


class PhotonMismatchError(FockprintError, ValueError):
    pass


class ModeMismatchError(FockprintError, ValueError):
    pass


class NonUnitaryError(FockprintError, ValueError):
    pass


class ScaleExceededError(FockprintError, ValueError):
    pass


class NotNormalizedError(FockprintError, ValueError):
    pass


class InconsistentProbabilitiesError(FockprintError, ValueError):
    """Raised when measured probabilities cannot come from any valid state."""


class DimensionMismatchError(FockprintError, ValueError):
    pass


class LayoutMismatchError(FockprintError, ValueError):
    """Feature layout of a dataset or distribution does not match what was expected."""


class DegenerateDataError(FockprintError, ValueError):
    pass


class EmptyDataError(FockprintError, ValueError):
    pass


class LengthMismatchError(FockprintError, ValueError):
    pass


class DatasetIOError(FockprintError, OSError):
    pass


class FormatError(FockprintError, ValueError):
    """File carries an unknown format or version tag."""


class CorruptRecordError(FockprintError, ValueError):
    pass


class ConvergenceWarning(UserWarning):
    """Iterative solver stopped before reaching its tolerance."""
