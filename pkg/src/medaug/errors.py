"""Exception types raised across medaug."""


class MedaugError(Exception):
    """Base class for every error medaug raises on bad input."""


class ChannelMismatch(MedaugError, ValueError):
    pass


class DimensionMismatch(MedaugError, ValueError):
    pass


class InvalidFactor(MedaugError, ValueError):
    pass


class InvalidSigma(MedaugError, ValueError):
    pass


class InvalidAlpha(MedaugError, ValueError):
    pass


class InvalidLambda(MedaugError, ValueError):
    pass


class TargetTooLarge(MedaugError, ValueError):
    pass


class DatasetTooSmall(MedaugError, ValueError):
    pass


class HeterogeneousDims(MedaugError, ValueError):
    pass


class EmptyEvaluationSet(MedaugError, ValueError):
    pass


class LengthMismatch(MedaugError, ValueError):
    pass


class EmptyInput(MedaugError, ValueError):
    pass


class MissingDirectory(MedaugError, FileNotFoundError):
    pass


class UnpairedMask(MedaugError, ValueError):
    pass


class EmptyClass(MedaugError, ValueError):
    pass


class InvalidTarget(MedaugError, ValueError):
    pass


class EmptyRoster(MedaugError, ValueError):
    pass


class UnsupportedImage(MedaugError, ValueError):
    """Raised when a file on disk is not 8-bit grayscale or RGB."""
