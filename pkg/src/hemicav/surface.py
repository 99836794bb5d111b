"""Mirror-substrate metrology: roughness PSD, sphere fit, scatter budget.

Heights are in nm, lateral coordinates in um, spatial frequencies in mm^-1
and 2-D PSD values in nm^2 mm^2. The PSD is normalised so that its integral
over the frequency plane equals the variance of the detrended map; with the
Hann window the windowed power is rescaled by ``sum(d**2)/sum((w*d)**2)``,
which for a stationary surface is the familiar ``1/mean(w**2)`` factor.
The radial curve is scaled so that ``sum(2*pi*f*PSD(f)*df)`` over all annuli
reproduces that same variance.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.integrate import trapezoid

from .errors import FitError, InputDomainError

__all__ = [
    "HeightMap",
    "PSDCurve",
    "SphereFit",
    "ScatterEstimate",
    "detrend",
    "compute_psd",
    "fit_sphere",
    "rms_in_band",
    "scatter_budget",
    "total_integrated_scatter",
    "load_height_map",
]


@dataclass(frozen=True)
class HeightMap:
    heights: np.ndarray  # nm, indexed [row (y), column (x)]
    pixel_pitch: float  # um
    mask: np.ndarray | None = None  # True where the pixel is valid

    def __post_init__(self):
        h = np.asarray(self.heights, dtype=float)
        if h.ndim != 2:
            raise InputDomainError("heights must be a 2-D grid")
        if not (math.isfinite(self.pixel_pitch) and self.pixel_pitch > 0):
            raise InputDomainError("pixel_pitch must be > 0")
        object.__setattr__(self, "heights", h)
        if self.mask is not None:
            m = np.asarray(self.mask, dtype=bool)
            if m.shape != h.shape:
                raise InputDomainError("mask shape must match heights")
            object.__setattr__(self, "mask", m)

    @property
    def complete(self) -> bool:
        return (self.mask is None or bool(self.mask.all())) and bool(np.all(np.isfinite(self.heights)))

    def coordinates(self):
        """Pixel-centre ``x, y`` grids in um."""
        ny, nx = self.heights.shape
        return np.meshgrid(np.arange(nx) * self.pixel_pitch, np.arange(ny) * self.pixel_pitch)


@dataclass(frozen=True)
class PSDCurve:
    spatial_frequency: np.ndarray  # mm^-1, annulus centres
    psd_value: np.ndarray  # nm^2 mm^2
    window: str
    bin_width: float  # mm^-1
    variance: float  # nm^2, of the detrended map


@dataclass(frozen=True)
class SphereFit:
    fitted_radius: float  # um, magnitude
    center: tuple  # (x, y, z) um
    rms_residual: float  # nm
    max_abs_residual: float  # nm
    fit_region_diameter: float  # um
    concave_up: bool  # centre lies above the surface (a dimple seen from the open side)

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class ScatterEstimate:
    rms_roughness: float  # nm
    total_integrated_scatter: float
    per_bounce_loss: float
    finesse_ceiling: float

    def to_dict(self):
        return asdict(self)


def detrend(heights: np.ndarray) -> np.ndarray:
    """Remove the least-squares plane (mean and tilt)."""
    h = np.asarray(heights, dtype=float)
    ny, nx = h.shape
    yy, xx = np.mgrid[0:ny, 0:nx]
    A = np.column_stack([np.ones(h.size), xx.ravel() - (nx - 1) / 2, yy.ravel() - (ny - 1) / 2])
    coef, *_ = np.linalg.lstsq(A, h.ravel(), rcond=None)
    return h - (A @ coef).reshape(h.shape)


def compute_psd(height_map: HeightMap, window: str = "hann") -> PSDCurve:
    """Radially averaged isotropic 2-D PSD of a complete height map."""
    if not height_map.complete:
        raise InputDomainError("PSD needs a complete, unmasked grid")
    h = height_map.heights
    ny, nx = h.shape
    if nx < 16 or ny < 16:
        raise InputDomainError("PSD needs at least a 16x16 grid")
    window = (window or "none").lower()
    if window == "hann":
        w = np.outer(np.hanning(ny), np.hanning(nx))
    elif window == "none":
        w = np.ones_like(h)
    else:
        raise InputDomainError(f"unknown window {window!r}")
    d = detrend(h)
    variance = float(np.mean(d**2))
    # remove the window-weighted mean so no power lands in the DC bin, then
    # rescale so the windowed power equals the detrended variance
    wd = w * (d - np.sum(w * d) / np.sum(w))
    power_ratio = float(np.sum(wd**2) / np.sum(d**2)) if variance > 0 else 1.0
    dx = height_map.pixel_pitch * 1e-3  # mm
    spec = np.fft.fft2(wd)
    psd2 = np.abs(spec) ** 2 * dx * dx / (nx * ny) / power_ratio

    fx = np.fft.fftfreq(nx, d=dx)
    fy = np.fft.fftfreq(ny, d=dx)
    df_x, df_y = 1.0 / (nx * dx), 1.0 / (ny * dx)
    FX, FY = np.meshgrid(fx, fy)
    fr = np.hypot(FX, FY)
    bin_width = min(df_x, df_y)
    idx = np.floor(fr / bin_width + 0.5).astype(int)  # annulus k covers [(k-1/2), (k+1/2)) bins
    nbins = int(idx.max()) + 1
    power = np.bincount(idx.ravel(), weights=(psd2 * df_x * df_y).ravel(), minlength=nbins)
    k = np.arange(1, nbins)  # drop DC annulus
    f = k * bin_width
    psd = power[1:] / (2 * np.pi * f * bin_width)
    return PSDCurve(f, psd, window, bin_width, variance)


def rms_in_band(psd: PSDCurve, f_low: float, f_high: float) -> float:
    """Band-limited RMS ``sqrt(int 2 pi f PSD(f) df)`` over ``[f_low, f_high]`` (trapezoid)."""
    f, p = psd.spatial_frequency, psd.psd_value
    if not f_high > f_low:
        raise InputDomainError("band must satisfy f_low < f_high")
    if f_low < 0 or f_low > f[-1] + 0.5 * psd.bin_width:
        raise InputDomainError("band lies outside the PSD support")
    sel = (f >= f_low) & (f <= f_high)
    if not np.any(sel):
        raise InputDomainError("band contains no PSD samples")
    fs, ps = f[sel], p[sel]
    integrand = 2 * np.pi * fs * ps
    if fs.size == 1:
        return float(math.sqrt(integrand[0] * psd.bin_width))
    # trapezoid plus the half-bin end caps so a single-annulus feature integrates fully
    area = trapezoid(integrand, fs) + 0.5 * psd.bin_width * (integrand[0] + integrand[-1])
    return float(math.sqrt(max(area, 0.0)))


def _region_points(height_map, region_center, region_diameter):
    x, y = height_map.coordinates()
    cx, cy = region_center
    sel = np.hypot(x - cx, y - cy) <= region_diameter / 2
    if height_map.mask is not None:
        sel &= height_map.mask
    sel &= np.isfinite(height_map.heights)
    return x[sel], y[sel], height_map.heights[sel] * 1e-3  # z in um


def fit_sphere(height_map: HeightMap, region_center, region_diameter: float) -> SphereFit:
    """Least-squares sphere over a circular region; residuals are measured minus sphere along z."""
    if not region_diameter > 0:
        raise InputDomainError("region_diameter must be > 0")
    x, y, z = _region_points(height_map, region_center, region_diameter)
    if x.size < 100:
        raise InputDomainError(f"fit region holds {x.size} valid pixels; at least 100 are needed")
    # centre coordinates for conditioning
    x0, y0, z0 = x.mean(), y.mean(), z.mean()
    u, v, w = x - x0, y - y0, z - z0

    # algebraic fit: u^2+v^2+w^2 = 2a u + 2b v + 2c w + d
    A = np.column_stack([2 * u, 2 * v, 2 * w, np.ones_like(u)])
    rhs = u**2 + v**2 + w**2
    sol, _, rank, _ = np.linalg.lstsq(A, rhs, rcond=None)
    if rank < 4:
        raise FitError("region is planar; radius is infinite")
    a, b, c, d = sol
    R2 = d + a * a + b * b + c * c
    # a flat patch drives the centre to infinity along z
    if not np.isfinite(R2) or R2 <= 0 or math.sqrt(R2) > 1e4 * region_diameter:
        raise FitError("region is flat to within the fit precision; radius is infinite")
    R = math.sqrt(R2)
    sign = 1.0 if c > 0 else -1.0  # centre above -> surface is the lower branch

    def surface(params):
        a_, b_, c_, R_ = params
        rad = R_**2 - (u - a_) ** 2 - (v - b_) ** 2
        if np.any(rad <= 0):
            raise FitError("fit region extends beyond the fitted sphere")
        return c_ - sign * np.sqrt(rad), rad

    # one Gauss-Newton pass on the z residuals
    p = np.array([a, b, c, R])
    zs, rad = surface(p)
    root = np.sqrt(rad)
    J = np.column_stack([
        -sign * (u - p[0]) / root,  # d z / d a
        -sign * (v - p[1]) / root,
        np.ones_like(u),
        -sign * p[3] / root,
    ])
    step, *_ = np.linalg.lstsq(J, w - zs, rcond=None)
    p = p + step
    zs, _ = surface(p)
    resid = (w - zs) * 1e3  # nm
    return SphereFit(
        fitted_radius=float(abs(p[3])),
        center=(float(p[0] + x0), float(p[1] + y0), float(p[2] + z0)),
        rms_residual=float(np.sqrt(np.mean(resid**2))),
        max_abs_residual=float(np.max(np.abs(resid))),
        fit_region_diameter=float(region_diameter),
        concave_up=bool(sign > 0),
    )


def total_integrated_scatter(sigma: float, wavelength: float) -> float:
    """Normal-incidence TIS ``(4 pi sigma / lambda)^2``; both in nm."""
    return (4 * math.pi * sigma / wavelength) ** 2


def scatter_budget(sigma: float, wavelength: float, mirror_transmissions) -> ScatterEstimate:
    """Finesse ceiling ``2 pi / (sum T + sum TIS)`` for one round trip over the listed mirrors."""
    if not sigma >= 0:
        raise InputDomainError("sigma must be >= 0")
    if not wavelength > 0:
        raise InputDomainError("wavelength must be > 0")
    Ts = [float(t) for t in mirror_transmissions]
    if not Ts or any(not 0 < t < 1 for t in Ts):
        raise InputDomainError("mirror transmissions must lie in (0, 1)")
    tis = total_integrated_scatter(sigma, wavelength)
    loss = sum(Ts) + tis * len(Ts)
    return ScatterEstimate(float(sigma), tis, tis, 2 * math.pi / loss)


def load_height_map(path, pixel_pitch: float | None = None) -> HeightMap:
    """Height map from a CSV grid (nm; ``pixel_pitch`` required) or a binary grid file."""
    from .gridio import read_grid

    path = str(path)
    if path.endswith(".csv") or path.endswith(".txt"):
        if pixel_pitch is None:
            raise InputDomainError("CSV height maps need an explicit pixel pitch")
        h = np.loadtxt(path, delimiter=",", comments="#")
        return HeightMap(np.atleast_2d(h), pixel_pitch)
    header, data = read_grid(path)
    pitch = pixel_pitch if pixel_pitch is not None else float(header["cell_size"])
    if header.get("cell_unit", "um") == "nm":
        pitch = pitch * 1e-3 if pixel_pitch is None else pitch
    return HeightMap(data, pitch)
