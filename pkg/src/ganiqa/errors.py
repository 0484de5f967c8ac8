"""Exception types shared across the package."""


class GaniqaError(Exception):
    """Base class for all package-specific errors."""


class MissingFile(GaniqaError):
    pass


class DecodeError(GaniqaError):
    pass


class EmptyManifest(GaniqaError):
    pass


class InfeasibleSplit(GaniqaError):
    pass


class InvalidParam(GaniqaError):
    pass


class NoEligibleSegments(GaniqaError):
    pass


class DimMismatch(GaniqaError):
    pass


class UnknownArch(GaniqaError):
    pass


class ShapeError(GaniqaError):
    pass


class DataEmpty(GaniqaError):
    pass


class NonFiniteLoss(GaniqaError):
    pass


class ImageTooSmall(GaniqaError):
    pass


class DegenerateRange(GaniqaError):
    pass


class TooFewSamples(GaniqaError):
    pass


class EmptyPatchSet(GaniqaError):
    pass


class SolverFailure(GaniqaError):
    pass


class LengthMismatch(GaniqaError):
    pass


class ZeroVariance(GaniqaError):
    pass


class EmptyGroup(GaniqaError):
    pass


class NonPositiveBaseline(GaniqaError):
    pass


class EmptyCorpus(GaniqaError):
    pass
