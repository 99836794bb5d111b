"""Coating deposited on a curved dimple and placement of its stop band.

The deposition flux reaches the dimple surface at an angle that grows with
the polar angle ``theta`` measured from the dimple axis, so the local layer
thickness falls off as ``cos(theta)**p``. A design is a base stack plus a
centre scale ``s``; the local stack at ``theta`` is the base stack with every
thickness multiplied by ``s * cos(theta)**p``.

Reflectance at each point is evaluated at normal local incidence: the cavity
mode's wavefronts follow the mirror curvature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from . import tmm
from .errors import InputDomainError, OptimizationError
from .tmm import LayerStack

__all__ = [
    "DimpleGeometry",
    "DepositionModel",
    "CoatingDesign",
    "local_stack",
    "reflectivity_profile",
    "cutoff_angle",
    "predicted_cutoff_angle",
    "optimize_center_scale",
    "match_stop_band",
    "load_design",
    "save_design",
]

_RIGHT_ANGLE = math.pi / 2
DEFAULT_MAX_ANGLE = math.radians(89.0)


@dataclass(frozen=True)
class DimpleGeometry:
    """Concave dimple: radius of curvature, aperture half-angle (deg), depth, substrate thickness (um).

    Either ``opening_half_angle`` or ``depth`` may be omitted (``None``); the
    other is then derived from ``cos(theta_open) = 1 - depth/R``.
    """

    radius_of_curvature: float
    opening_half_angle: float | None = None
    depth: float | None = None
    substrate_thickness: float | None = None

    def __post_init__(self):
        R = self.radius_of_curvature
        if not R > 0:
            raise InputDomainError("radius_of_curvature must be > 0")
        d, a = self.depth, self.opening_half_angle
        if d is None and a is None:
            raise InputDomainError("give depth or opening_half_angle")
        if d is None:
            if not 0 < a < 90:
                raise InputDomainError("opening_half_angle must lie in (0, 90) deg")
            d = R * (1 - math.cos(math.radians(a)))
            object.__setattr__(self, "depth", d)
        if not 0 < d < R:
            raise InputDomainError("depth must satisfy 0 < depth < radius_of_curvature")
        derived = math.degrees(math.acos(1 - d / R))
        if a is None:
            object.__setattr__(self, "opening_half_angle", derived)
        elif abs(math.cos(math.radians(a)) - (1 - d / R)) > 1e-6:
            raise InputDomainError(
                f"opening_half_angle {a} deg inconsistent with depth {d} um (expected {derived:.6f} deg)"
            )

    @property
    def aperture_radius(self) -> float:
        """Radius (um) of the dimple rim."""
        return self.radius_of_curvature * math.sin(math.radians(self.opening_half_angle))


@dataclass(frozen=True)
class DepositionModel:
    thinning_exponent: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.thinning_exponent) and self.thinning_exponent >= 0):
            raise InputDomainError("thinning_exponent must be >= 0")

    def thickness_factor(self, theta):
        return np.cos(theta) ** self.thinning_exponent


@dataclass(frozen=True)
class CoatingDesign:
    base_stack: LayerStack
    center_scale: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.center_scale) and self.center_scale > 0):
            raise InputDomainError("center_scale must be > 0")


def _check_theta(theta):
    t = np.asarray(theta, dtype=float)
    if np.any(~np.isfinite(t)) or np.any(t < 0) or np.any(t >= _RIGHT_ANGLE):
        raise InputDomainError("theta must satisfy 0 <= theta < pi/2")


def local_stack(design: CoatingDesign, model: DepositionModel, theta: float) -> LayerStack:
    _check_theta(theta)
    factor = design.center_scale * float(model.thickness_factor(theta))
    return tmm.scale_thicknesses(design.base_stack, factor)


def _profile_R(base_stack, scale, model, wavelength, theta):
    # one vectorised call: each theta is a uniformly scaled copy of the base stack
    factors = scale * model.thickness_factor(np.asarray(theta, dtype=float))
    wl = np.full(np.shape(factors), float(wavelength))
    return tmm.sweep(base_stack, wl, 0.0, tmm.Polarization.TE, thickness_scale=factors).R


def reflectivity_profile(design: CoatingDesign, model: DepositionModel, working_wavelength: float,
                         theta_grid) -> list[tuple[float, float]]:
    """``[(theta, R), ...]`` at the working wavelength across the dimple."""
    theta = np.atleast_1d(np.asarray(theta_grid, dtype=float))
    _check_theta(theta)
    R = _profile_R(design.base_stack, design.center_scale, model, working_wavelength, theta)
    return [(float(t), float(r)) for t, r in zip(theta, R)]


def cutoff_angle(design: CoatingDesign, model: DepositionModel, working_wavelength: float,
                 reflectance_threshold: float, max_angle: float = DEFAULT_MAX_ANGLE,
                 step: float = math.radians(0.5), tolerance: float = math.radians(0.01)):
    """Smallest polar angle (rad) at which R drops below the threshold, or ``None``."""
    if not 0 < reflectance_threshold < 1:
        raise InputDomainError("reflectance_threshold must lie in (0, 1)")
    _check_theta(max_angle)
    n = max(2, int(math.ceil(max_angle / step)) + 1)
    grid = np.linspace(0.0, max_angle, n)
    R = _profile_R(design.base_stack, design.center_scale, model, working_wavelength, grid)
    below = np.nonzero(R < reflectance_threshold)[0]
    if below.size == 0:
        return None
    k = int(below[0])
    if k == 0:
        return 0.0
    inside, outside = grid[k - 1], grid[k]
    while outside - inside > tolerance:
        mid = 0.5 * (inside + outside)
        r_mid = _profile_R(design.base_stack, design.center_scale, model, working_wavelength, mid)
        if r_mid >= reflectance_threshold:
            inside = mid
        else:
            outside = mid
    return float(0.5 * (inside + outside))


def predicted_cutoff_angle(working_wavelength, band_edge, center_scale=1.0, thinning_exponent=1.0):
    """Angle at which the scaled upper band edge ``s*cos^p(theta)*edge`` reaches the working wavelength."""
    ratio = working_wavelength / (center_scale * band_edge)
    if ratio >= 1:
        return 0.0
    if thinning_exponent == 0:
        return None
    return math.acos(ratio ** (1.0 / thinning_exponent))


def _worst_case(base_stack, model, wavelength, theta_grid, s):
    return float(np.min(_profile_R(base_stack, s, model, wavelength, theta_grid)))


def optimize_center_scale(base_stack: LayerStack, model: DepositionModel, working_wavelength: float,
                          max_angle: float, scale_bracket=(0.7, 1.8), coarse_step: float = 0.005,
                          theta_step: float = math.radians(0.25), tolerance: float = 1e-7):
    """Centre scale maximising the worst-case reflectance over ``[0, max_angle]``.

    A coarse scan over ``scale_bracket`` locates the best bracket, which a
    golden-section search then refines to ``tolerance``. Returns
    ``(s_opt, min_R)``.
    """
    _check_theta(max_angle)
    if theta_step > math.radians(0.5):
        raise InputDomainError("theta grid spacing must not exceed 0.5 deg")
    lo, hi = scale_bracket
    if not 0 < lo < hi:
        raise InputDomainError("scale_bracket must satisfy 0 < low < high")
    theta = np.linspace(0.0, max_angle, max(2, int(math.ceil(max_angle / theta_step)) + 1))

    def merit(s):
        return _worst_case(base_stack, model, working_wavelength, theta, s)

    scales = np.linspace(lo, hi, int(round((hi - lo) / coarse_step)) + 1)
    coarse = np.array([merit(s) for s in scales])
    i = int(np.argmax(coarse))
    if coarse[i] <= 0.5:
        raise OptimizationError(
            f"no centre scale in [{lo}, {hi}] reaches a worst-case reflectance above 0.5",
            best=(float(scales[i]), float(coarse[i])),
        )
    a = scales[max(i - 1, 0)]
    b = scales[min(i + 1, len(scales) - 1)]
    invphi = (math.sqrt(5) - 1) / 2
    c, d = b - invphi * (b - a), a + invphi * (b - a)
    fc, fd = merit(c), merit(d)
    while b - a > tolerance:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = merit(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = merit(d)
    candidates = [(coarse[i], scales[i]), (fc, c), (fd, d)]
    best_f, best_s = max(candidates, key=lambda p: (p[0], -p[1]))
    return float(best_s), float(best_f)


def match_stop_band(target_band, n_low=1.45, substrate_index=1.5, reflectance_threshold=0.95,
                    n_high_range=(2.2, 2.6), max_pairs=30, incident_index=1.0):
    """Smallest quarter-wave ``(H L)^N`` stack whose threshold band equals ``target_band``.

    Pairs are tried in increasing order. For each ``N`` the high index is solved
    (within ``n_high_range``) so the band-edge ratio matches the target; the
    design wavelength then places the band, using the exact wavelength scaling
    of a dispersionless stack. Returns ``(stack, info)``.
    """
    lam_lo, lam_hi = (float(x) for x in target_band)
    want = lam_hi / lam_lo
    probe_center = 0.5 * (lam_lo + lam_hi)
    scan = (0.5 * lam_lo, 1.5 * lam_hi)

    def band(nh, n_pairs, center=probe_center, tol=1e-5):
        st = tmm.quarter_wave_stack(nh, n_low, substrate_index, center, n_pairs,
                                    incident_index=incident_index)
        return tmm.stop_band(st, reflectance_threshold=reflectance_threshold,
                             scan_range=scan, scan_step=0.25, tolerance=tol)

    def ratio(nh, n_pairs):
        b = band(nh, n_pairs)
        return b[1] / b[0] if b else 1.0

    nh_lo, nh_hi = n_high_range
    for n_pairs in range(1, max_pairs + 1):
        r_lo, r_hi = ratio(nh_lo, n_pairs), ratio(nh_hi, n_pairs)
        if not (r_lo <= want <= r_hi):
            continue
        if r_lo == 1.0:
            # the low end has no band at all; move it up to where one appears
            grid = np.linspace(nh_lo, nh_hi, 41)
            vals = [ratio(x, n_pairs) for x in grid]
            k = next(j for j, v in enumerate(vals) if v > 1.0)
            if vals[k] > want:
                continue
            nh_lo = grid[k]
        nh = brentq(lambda x: ratio(x, n_pairs) - want, nh_lo, nh_hi, xtol=1e-10)
        b = band(nh, n_pairs)
        center = probe_center * lam_hi / b[1]
        stack = tmm.quarter_wave_stack(nh, n_low, substrate_index, center, n_pairs,
                                       incident_index=incident_index)
        info = {"num_pairs": n_pairs, "n_high": nh, "center_wavelength": center,
                "band": band(nh, n_pairs, center, tol=1e-3)}
        return stack, info
    raise InputDomainError(f"no quarter-wave stack with <= {max_pairs} pairs matches {target_band}")


def load_design(path) -> CoatingDesign:
    """Stack file with an optional ``scale <s>`` header line."""
    stack, headers = tmm.load_stack(path)
    return CoatingDesign(stack, float(headers.get("scale", 1.0)))


def save_design(design: CoatingDesign, path) -> None:
    tmm.save_stack(design.base_stack, path, {"scale": repr(design.center_scale)})
