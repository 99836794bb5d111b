"""Design and analysis tools for open plano-concave optical micro-cavities.

Submodules
----------
tmm      transfer-matrix response of planar multilayers
coating  dimple coatings with angle-dependent layer thinning
modes    paraxial Gaussian modes and resonance spectra
cqed     emitter-cavity coupling and transmission line shapes
fdtd     body-of-revolution FDTD solver for the full vector field
surface  height-map roughness, sphere fits and scatter budgets
cli      command-line front end (``hemicav`` / ``python -m hemicav``)
"""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    AnalysisError,
    BuildError,
    DegenerateGeometryError,
    FitError,
    HemicavError,
    InputDomainError,
    OptimizationError,
)

__all__ = [
    "__version__",
    "HemicavError",
    "InputDomainError",
    "DegenerateGeometryError",
    "BuildError",
    "AnalysisError",
    "OptimizationError",
    "FitError",
]
