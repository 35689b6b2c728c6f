"""Exception hierarchy shared by all modules."""


class LabError(ValueError):
    """Base class for every error raised by tangencylab."""


# cocycles
class ShapeMismatch(LabError):
    pass


class NonInvariantSplitting(LabError):
    pass


class NonInvariantLine(LabError):
    pass


class ComplexOrRepeatedSpectrum(LabError):
    pass


# perturbation paths
class DomainError(LabError):
    pass


class AngleTooLarge(LabError):
    pass


class SpectrumNotRealPositiveDistinct(LabError):
    pass


class DiameterExceeded(LabError):
    pass


class NotDoubleEigenvalue(LabError):
    pass


class TargetOutOfRange(LabError):
    pass


# affine unfolding
class InvalidModel(LabError):
    pass


class OutOfChart(LabError):
    pass


class OutsideW0(LabError):
    pass


class ResonantDenominator(LabError):
    pass


class NotYetInWindow(LabError):
    pass


class InadmissibleN(LabError):
    pass


class DegenerateEntries(LabError):
    pass


# cli
class ConfigInvalid(LabError):
    pass
