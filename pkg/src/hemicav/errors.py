"""Exception hierarchy shared by all modules."""


class HemicavError(Exception):
    """Base class for every error raised by the package."""


class InputDomainError(HemicavError, ValueError):
    """An argument lies outside the domain the operation accepts."""


class DegenerateGeometryError(InputDomainError):
    """Resonator geometry is marginal or unstable where a stable one is required."""


class BuildError(HemicavError):
    """A simulation domain or probe layout could not be constructed."""


class AnalysisError(HemicavError):
    """A spectrum or record could not be analysed (no peak, overlap, non-convergence)."""


class OptimizationError(HemicavError):
    """The coating optimizer found no acceptable design.

    ``best`` carries the best ``(scale, min_reflectance)`` seen during the scan.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class FitError(HemicavError):
    """Sphere fit failed; ``radius`` is ``inf`` for a flat region."""

    def __init__(self, message, radius=float("inf")):
        super().__init__(message)
        self.radius = radius
