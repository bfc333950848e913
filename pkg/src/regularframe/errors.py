"""Exception hierarchy shared by all regularframe modules."""


class RegularFrameError(Exception):
    """Base class for every error raised by this package."""


class EvaluationError(RegularFrameError):
    pass


class SingularMetricError(RegularFrameError):
    pass


class SignatureError(RegularFrameError):
    pass


class NotGloballyHyperbolicHereError(RegularFrameError):
    """The lapse term g(n, n) is not strictly negative at a point."""


class DomainExitError(RegularFrameError):
    pass


class BlowupError(RegularFrameError):
    pass


class NoRegularNeighborhoodError(RegularFrameError):
    pass


class OutOfCubeError(RegularFrameError):
    pass


class CoverFailureError(RegularFrameError):
    pass


class ConfigError(RegularFrameError):
    pass


class DegenerateFrameError(RegularFrameError):
    pass


class InterpolationSignatureError(RegularFrameError):
    pass


class StabilityError(RegularFrameError):
    pass


class SliceError(RegularFrameError):
    pass


class QuadratureError(RegularFrameError):
    pass


class LatticeError(RegularFrameError):
    pass


class ParticleSystemError(RegularFrameError):
    pass


class UnitarityError(RegularFrameError):
    pass


class VacuumError(RegularFrameError):
    pass


class RegistryError(RegularFrameError):
    pass


class SchemaError(RegularFrameError):
    """Scenario file does not match its schema; carries a JSON location."""

    def __init__(self, message, location="$"):
        super().__init__(message if location in message else f"{location}: {message}")
        self.location = location
