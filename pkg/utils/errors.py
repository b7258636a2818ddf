"""Error hierarchy shared by the toric, localization and engine packages"""

from typing import Optional


class ToricGWError(Exception):
    """Base class; `code` is the machine-readable name printed by the CLI"""

    code = "ToricGWError"

    def __init__(self, message: str = ""):
        super().__init__(message)
        self.message = message

    def __str__(self) -> str:
        return self.message


# Fan validation

class MalformedFan(ToricGWError):
    code = "MalformedFan"


class NonPrimitiveRay(ToricGWError):
    code = "NonPrimitiveRay"


class NonSmoothCone(ToricGWError):
    code = "NonSmoothCone"


class DanglingFacet(ToricGWError):
    code = "DanglingFacet"


class DisconnectedFan(ToricGWError):
    code = "DisconnectedFan"


class DuplicateRay(ToricGWError):
    code = "DuplicateRay"


class RayNotInCone(ToricGWError):
    code = "RayNotInCone"


# Intersection theory

class NotAdjacent(ToricGWError):
    code = "NotAdjacent"


class NotProjective(ToricGWError):
    code = "NotProjective"


class NotEffective(ToricGWError):
    code = "NotEffective"


class ZeroClass(ToricGWError):
    code = "ZeroClass"


class MismatchedFan(ToricGWError):
    code = "MismatchedFan"


class UngradedClass(ToricGWError):
    code = "UngradedClass"


# Localization

class GammaNotNeighbor(ToricGWError):
    code = "GammaNotNeighbor"


class DegenerateWeights(ToricGWError):
    """A zero denominator was hit at the sampled weights; resample and retry"""

    code = "DegenerateWeights"


class NegativeEdgeDegree(ToricGWError):
    code = "NegativeEdgeDegree"


class MarkOutOfRange(ToricGWError):
    code = "MarkOutOfRange"


# Integrand language

class IntegrandSyntaxError(ToricGWError):
    """Parse failure; `position` is the 0-based offset into the source text"""

    code = "SyntaxError"

    def __init__(self, message: str = "", position: Optional[int] = None):
        super().__init__(message)
        self.position = position

    def __str__(self) -> str:
        if self.position is None:
            return self.message
        return f"{self.message} (at position {self.position})"

    def __reduce__(self):
        return (type(self), (self.message, self.position))


class UnknownSymbol(IntegrandSyntaxError):
    code = "UnknownSymbol"


class MarkIndexOutOfRange(IntegrandSyntaxError):
    code = "MarkIndexOutOfRange"


class InhomogeneousSum(IntegrandSyntaxError):
    code = "InhomogeneousSum"


class MultiplePsi(IntegrandSyntaxError):
    code = "MultiplePsi"


# Engine

class WeightExhaustion(ToricGWError):
    code = "WeightExhaustion"


class VerifyMismatch(ToricGWError):
    code = "VerifyMismatch"


class JobFileError(ToricGWError):
    code = "JobFileError"


class DimensionMismatchWarning(UserWarning):
    """Integrand codimension differs from the virtual dimension"""
