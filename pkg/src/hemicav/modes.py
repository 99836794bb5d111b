"""Paraxial theory of the plano-concave resonator.

Geometry: a planar mirror (``g1 = 1``) facing a concave mirror of radius
``R_M`` at on-axis separation ``L``; ``g2 = 1 - L/R_M``. The waist sits on the
planar mirror. ``w0`` is the 1/e *amplitude* radius throughout.

The hemispherical point ``L = R_M`` is marginally stable; paraxial waist and
spectrum formulas break down there and are refused rather than evaluated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.constants import c as SPEED_OF_LIGHT

from .errors import DegenerateGeometryError, InputDomainError

__all__ = [
    "CavityGeometry",
    "GaussianModeParams",
    "Stability",
    "ModeSpectrum",
    "stability",
    "gaussian_mode",
    "mode_spectrum",
    "mode_waist_from_divergence",
    "divergence_from_waist",
    "round_trip_q",
    "free_spectral_range",
]


@dataclass(frozen=True)
class CavityGeometry:
    length: float  # um
    mirror_radius: float  # um

    def __post_init__(self):
        for name in ("length", "mirror_radius"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise InputDomainError(f"{name} must be > 0 um, got {v}")

    @property
    def g1(self) -> float:
        return 1.0

    @property
    def g2(self) -> float:
        return 1.0 - self.length / self.mirror_radius


@dataclass(frozen=True)
class Stability:
    g1: float
    g2: float
    stable: bool
    marginal: bool


@dataclass(frozen=True)
class GaussianModeParams:
    waist_radius: float  # um
    rayleigh_range: float  # um
    divergence_half_angle: float  # rad
    effective_mode_volume: float  # um^3


@dataclass(frozen=True)
class ModeSpectrum:
    """Rows of ``(q, n, frequency_THz)`` sorted by frequency."""

    modes: tuple

    def __iter__(self):
        return iter(self.modes)

    def __len__(self):
        return len(self.modes)

    @property
    def frequencies(self) -> np.ndarray:
        return np.array([m[2] for m in self.modes])

    def rows(self):
        """``(q, n, frequency_THz, wavelength_nm)`` rows for tabular export."""
        return [(q, n, f, SPEED_OF_LIGHT / (f * 1e12) * 1e9) for q, n, f in self.modes]


def stability(geometry: CavityGeometry) -> Stability:
    g1, g2 = geometry.g1, geometry.g2
    prod = g1 * g2
    stable = 0.0 <= prod <= 1.0
    marginal = prod == 0.0 or prod == 1.0
    return Stability(g1, g2, stable, marginal)


def _require_strictly_stable(geometry):
    st = stability(geometry)
    if not st.stable or st.marginal:
        kind = "marginal" if st.marginal else "unstable"
        raise DegenerateGeometryError(
            f"{kind} geometry (g1*g2 = {st.g1 * st.g2:g}); paraxial modes need 0 < g1*g2 < 1"
        )
    return st


def gaussian_mode(geometry: CavityGeometry, wavelength: float) -> GaussianModeParams:
    """Fundamental-mode waist, Rayleigh range, divergence and mode volume. ``wavelength`` in nm."""
    _require_strictly_stable(geometry)
    if not wavelength > 0:
        raise InputDomainError("wavelength must be > 0")
    lam = wavelength * 1e-3  # um
    L, R = geometry.length, geometry.mirror_radius
    w0_sq = lam / math.pi * math.sqrt(L * (R - L))
    w0 = math.sqrt(w0_sq)
    return GaussianModeParams(
        waist_radius=w0,
        rayleigh_range=math.pi * w0_sq / lam,
        divergence_half_angle=lam / (math.pi * w0),
        effective_mode_volume=math.pi * w0_sq * L / 4,
    )


def round_trip_q(geometry: CavityGeometry, wavelength: float) -> complex:
    """Self-consistent complex beam parameter at the planar mirror from the round-trip ABCD matrix.

    Independent of :func:`gaussian_mode`; used to cross-check the waist.
    """
    _require_strictly_stable(geometry)
    L, R = geometry.length, geometry.mirror_radius
    prop = np.array([[1.0, L], [0.0, 1.0]])
    curved = np.array([[1.0, 0.0], [-2.0 / R, 1.0]])
    A, B, C, D = (prop @ curved @ prop).ravel()  # planar mirror is the identity
    # q = (A q + B)/(C q + D)  ->  C q^2 + (D - A) q - B = 0, pick Im(1/q) < 0
    roots = np.roots([C, D - A, -B])
    for q in roots:
        if np.imag(1 / q) < 0:
            return complex(q)
    raise DegenerateGeometryError("no confined round-trip solution")


def free_spectral_range(length: float) -> float:
    """``c/2L`` in THz for a length in um."""
    return SPEED_OF_LIGHT / (2 * length * 1e-6) / 1e12


def mode_spectrum(geometry: CavityGeometry, wavelength_window, max_transverse_order: int) -> ModeSpectrum:
    """Modes ``nu(q, n) = FSR*(q + (n+1)*arccos(sqrt(g1 g2))/pi)`` inside the window (nm)."""
    st = _require_strictly_stable(geometry)
    lam_a, lam_b = sorted(float(x) for x in wavelength_window)
    if not lam_a > 0:
        raise InputDomainError("wavelength window must be positive")
    if int(max_transverse_order) != max_transverse_order or max_transverse_order < 0:
        raise InputDomainError("max_transverse_order must be a non-negative integer")
    fsr = free_spectral_range(geometry.length)
    gouy = math.acos(math.sqrt(st.g1 * st.g2)) / math.pi
    f_lo = SPEED_OF_LIGHT / (lam_b * 1e-9) / 1e12
    f_hi = SPEED_OF_LIGHT / (lam_a * 1e-9) / 1e12
    modes = []
    for n in range(int(max_transverse_order) + 1):
        offset = (n + 1) * gouy
        q_min = max(0, math.ceil(f_lo / fsr - offset))
        q_max = math.floor(f_hi / fsr - offset)
        for q in range(q_min, q_max + 1):
            f = fsr * (q + offset)
            if f > 0 and f_lo <= f <= f_hi:
                modes.append((q, n, f))
    modes.sort(key=lambda m: (m[2], m[0], m[1]))
    return ModeSpectrum(tuple(modes))


def mode_waist_from_divergence(theta_c: float, wavelength: float) -> float:
    """Paraxial waist (um) for a divergence half-angle (rad); ``wavelength`` in nm.

    This is the small-angle relation. Near the hemispherical point the real
    mode is wider in angle than it predicts; use the FDTD solver there.
    """
    if not 0 < theta_c < math.pi / 2:
        raise InputDomainError("theta_c must lie in (0, pi/2)")
    return wavelength * 1e-3 / (math.pi * theta_c)


def divergence_from_waist(waist_radius: float, wavelength: float) -> float:
    if not waist_radius > 0:
        raise InputDomainError("waist_radius must be > 0")
    return wavelength * 1e-3 / (math.pi * waist_radius)
