"""Body-of-revolution FDTD solver for plano-concave micro-cavities."""

from . import io
from .analysis import resolution_limit, resonances, spectrum, strongest_resonance
from .domain import MIN_RESOLUTION, SimulationDomain, build_domain, rasterize_layers
from .solver import (
    Fields,
    ModeProfile,
    ProbeRecord,
    SourceSpec,
    courant_limit,
    field_energy,
    mode_profile,
    run_ringdown,
    step,
    time_step,
)

__all__ = [
    "MIN_RESOLUTION",
    "SimulationDomain",
    "SourceSpec",
    "ProbeRecord",
    "ModeProfile",
    "Fields",
    "build_domain",
    "rasterize_layers",
    "step",
    "run_ringdown",
    "resonances",
    "strongest_resonance",
    "io",
    "resolution_limit",
    "spectrum",
    "mode_profile",
    "field_energy",
    "courant_limit",
    "time_step",
]
