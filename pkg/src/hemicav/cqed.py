"""Emitter-cavity coupling, linewidths and transmission-spectrum analysis.

Energy-like quantities are in ueV. ``gamma`` (emitter) and ``kappa`` (cavity)
are half widths at half maximum (HWHM); a bare cavity line therefore has a
FWHM of ``2*kappa``. ``splitting`` is reported as ``2*hbar*g``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy import constants as const
from scipy.optimize import least_squares
from scipy.signal import find_peaks

from .errors import AnalysisError, InputDomainError
from .modes import free_spectral_range
from .tmm import finesse_from_mirrors

__all__ = [
    "DEBYE",
    "Emitter",
    "CavityLoss",
    "CouplingReport",
    "TransmissionSpectrum",
    "LineFit",
    "coupling_energy",
    "cavity_linewidth",
    "strong_coupling",
    "transmission_spectrum",
    "airy_spectrum",
    "effective_finesse",
    "absorption_for_finesse",
    "extract_finesse",
    "peak_separation",
    "normal_mode_splitting",
    "SplittingFit",
    "classify_line",
]

DEBYE = 3.33564e-30  # C m
_UEV = const.e * 1e-6  # J per ueV


@dataclass(frozen=True)
class Emitter:
    dipole_moment: float  # Debye
    transition_wavelength: float  # nm
    linewidth: float  # ueV, HWHM
    detuning_from_cavity: float = 0.0  # ueV

    def __post_init__(self):
        if not self.dipole_moment >= 0:
            raise InputDomainError("dipole_moment must be >= 0")
        if not self.linewidth > 0:
            raise InputDomainError("linewidth must be > 0")
        if not self.transition_wavelength > 0:
            raise InputDomainError("transition_wavelength must be > 0")


@dataclass(frozen=True)
class CavityLoss:
    length: float  # um
    mirror_reflectivity_product_sqrt: float
    free_spectral_range: float  # THz
    finesse: float
    kappa: float  # ueV, HWHM


@dataclass(frozen=True)
class CouplingReport:
    coupling_energy: float  # hbar*g, ueV
    splitting: float  # 2*hbar*g, ueV
    gamma: float
    kappa: float
    strong: bool
    margin: float

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class TransmissionSpectrum:
    """Transmission sampled on an increasing grid; ``unit`` names the grid axis."""

    frequency_grid: np.ndarray
    transmission: np.ndarray
    unit: str = "ueV"

    def __post_init__(self):
        x = np.asarray(self.frequency_grid, dtype=float)
        y = np.asarray(self.transmission, dtype=float)
        if x.shape != y.shape or x.ndim != 1:
            raise InputDomainError("grid and transmission must be equal-length 1-D arrays")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise InputDomainError("spectrum must be finite")
        object.__setattr__(self, "frequency_grid", x)
        object.__setattr__(self, "transmission", y)


@dataclass(frozen=True)
class LineFit:
    shape: str  # "Lorentzian" | "Gaussian" | "ambiguous"
    center: float
    width: float  # FWHM of the better-fitting model
    residual_ratio: float  # SSR(Gaussian) / SSR(Lorentzian)
    lorentzian_fwhm: float
    gaussian_fwhm: float


def coupling_energy(emitter: Emitter, effective_mode_volume: float) -> float:
    """``hbar*g = d*sqrt(hbar*omega/(2*eps0*V))`` in ueV, emitter at an antinode. ``V`` in um^3."""
    if not effective_mode_volume > 0:
        raise InputDomainError("effective_mode_volume must be > 0")
    d = emitter.dipole_moment * DEBYE
    omega = 2 * math.pi * const.c / (emitter.transition_wavelength * 1e-9)
    V = effective_mode_volume * 1e-18
    return d * math.sqrt(const.hbar * omega / (2 * const.epsilon_0 * V)) / _UEV


def cavity_linewidth(length: float, mirror_reflectivity: float) -> CavityLoss:
    """Two identical mirrors of reflectance ``R`` at separation ``length`` (um)."""
    if not 0 < mirror_reflectivity < 1:
        raise InputDomainError("mirror_reflectivity must lie in (0, 1)")
    if not length > 0:
        raise InputDomainError("length must be > 0")
    fsr = free_spectral_range(length)
    F = finesse_from_mirrors(mirror_reflectivity, mirror_reflectivity, 0.0)
    kappa = const.h * (fsr * 1e12 / F) / 2 / _UEV
    return CavityLoss(length, mirror_reflectivity, fsr, F, kappa)


def strong_coupling(coupling: float, gamma: float, kappa: float) -> CouplingReport:
    """Strong iff ``2*hbar*g > gamma + kappa`` (strict; a tie is not strong)."""
    if min(coupling, gamma, kappa) < 0:
        raise InputDomainError("coupling and linewidths must be non-negative")
    splitting = 2.0 * coupling
    margin = splitting - (gamma + kappa)
    return CouplingReport(coupling, splitting, gamma, kappa, bool(margin > 0), margin)


def transmission_spectrum(cavity: CavityLoss, emitter: Emitter | None, coupling: float,
                          detuning_grid, cavity_detuning: float = 0.0,
                          peak_transmission: float = 1.0) -> TransmissionSpectrum:
    """Single-mode transmission near one longitudinal resonance with an optional two-level absorber.

    ``T = T_pk * kappa^2 / |i(d - d_c) + kappa + g^2/(i(d - d_e) + gamma)|^2``. With no
    emitter (or ``g = 0``) this is the Lorentzian limit of the Airy peak.
    ``peak_transmission`` is the bare Airy peak, 1 for identical lossless mirrors.
    """
    d = np.asarray(detuning_grid, dtype=float)
    if d.ndim != 1 or not np.all(np.isfinite(d)) or np.any(np.diff(d) <= 0):
        raise InputDomainError("detuning grid must be finite and strictly increasing")
    k = cavity.kappa
    denom = 1j * (d - cavity_detuning) + k
    if emitter is not None and coupling != 0:
        denom = denom + coupling**2 / (1j * (d - emitter.detuning_from_cavity) + emitter.linewidth)
    T = peak_transmission * k**2 / np.abs(denom) ** 2
    return TransmissionSpectrum(d, T, "ueV")


def airy_spectrum(frequency_grid, free_spectral_range: float, finesse: float,
                  offset: float = 0.0, peak_transmission: float = 1.0) -> TransmissionSpectrum:
    """Lossless Fabry-Perot transmission ``T_pk/(1 + (2F/pi)^2 sin^2(pi (f - offset)/FSR))``."""
    f = np.asarray(frequency_grid, dtype=float)
    coef = (2 * finesse / math.pi) ** 2
    T = peak_transmission / (1 + coef * np.sin(math.pi * (f - offset) / free_spectral_range) ** 2)
    return TransmissionSpectrum(f, T, "THz")


def _finesse(rho):
    return math.pi * math.sqrt(rho) / (1 - rho)


def _rho_for_finesse(F, tol=1e-12):
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _finesse(mid) < F:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def effective_finesse(base_finesse: float, single_pass_intensity_absorption: float) -> float:
    """Finesse after an intracavity absorber with single-pass intensity loss ``A``.

    The round-trip amplitude factor of the bare cavity is recovered from
    ``base_finesse`` and multiplied by ``1 - A`` (two passes of intensity
    ``1 - A`` each).
    """
    A = single_pass_intensity_absorption
    if not 0 <= A < 1:
        raise InputDomainError("absorption must lie in [0, 1)")
    if not base_finesse > 0:
        raise InputDomainError("base_finesse must be > 0")
    rho = _rho_for_finesse(base_finesse) * (1 - A)
    return _finesse(rho)


def absorption_for_finesse(base_finesse: float, target_finesse: float, tol: float = 1e-12) -> float:
    """Single-pass absorption that lowers ``base_finesse`` to ``target_finesse``."""
    if not 0 < target_finesse <= base_finesse:
        raise InputDomainError("target finesse must lie in (0, base_finesse]")
    lo, hi = 0.0, 1.0 - 1e-15
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if effective_finesse(base_finesse, mid) > target_finesse:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _refine(x, y, i):
    # parabola through samples i-1, i, i+1
    if i <= 0 or i >= len(y) - 1:
        return float(x[i]), float(y[i])
    coeffs = np.polyfit(x[i - 1:i + 2] - x[i], y[i - 1:i + 2], 2)
    a, b, c0 = coeffs
    if a >= 0:
        return float(x[i]), float(y[i])
    dx = -b / (2 * a)
    return float(x[i] + dx), float(c0 - b * b / (4 * a))


def _significant_peaks(y, rel_prominence=0.25):
    span = float(np.max(y) - np.min(y))
    if not span > 0:
        return np.array([], dtype=int)
    peaks, _ = find_peaks(y, prominence=rel_prominence * span)
    return peaks


def _half_max_crossing(x, y, i, level, step):
    j = i
    while 0 <= j + step < len(y) and y[j + step] >= level:
        j += step
    k = j + step
    if not 0 <= k < len(y):
        return None
    # linear interpolation between j (above) and k (below)
    return float(x[j] + (level - y[j]) * (x[k] - x[j]) / (y[k] - y[j]))


def extract_finesse(spectrum: TransmissionSpectrum) -> float:
    """Finesse ``FSR/FWHM`` averaged over the resolvable peaks of a multi-peak spectrum."""
    x, y = spectrum.frequency_grid, spectrum.transmission
    peaks = _significant_peaks(y)
    if len(peaks) < 2:
        raise AnalysisError("need at least two resolvable transmission peaks")
    centers, heights = zip(*(_refine(x, y, i) for i in peaks))
    centers = np.array(centers)
    spacings = np.diff(centers)
    finesses = []
    for k, i in enumerate(peaks):
        level = heights[k] / 2
        left = _half_max_crossing(x, y, i, level, -1)
        right = _half_max_crossing(x, y, i, level, +1)
        local = [spacings[j] for j in (k - 1, k) if 0 <= j < len(spacings)]
        spacing = float(np.mean(local))
        if left is None or right is None:
            continue  # peak cut by the grid edge
        fwhm = right - left
        if fwhm > 0.8 * min(local):
            raise AnalysisError("peaks overlap (FWHM exceeds 0.8 of the peak spacing)")
        if (k > 0 and left < centers[k - 1]) or (k < len(centers) - 1 and right > centers[k + 1]):
            raise AnalysisError("peaks overlap (no half-maximum crossing between peaks)")
        finesses.append(spacing / fwhm)
    if not finesses:
        raise AnalysisError("no peak has both half-maximum crossings inside the grid")
    return float(np.mean(finesses))


def peak_separation(spectrum: TransmissionSpectrum) -> float:
    """Distance between the two highest local maxima (normal-mode splitting)."""
    x, y = spectrum.frequency_grid, spectrum.transmission
    peaks, _ = find_peaks(y)
    if len(peaks) < 2:
        raise AnalysisError("spectrum has fewer than two local maxima")
    top = peaks[np.argsort(y[peaks])[-2:]]
    c = sorted(_refine(x, y, i)[0] for i in top)
    return float(c[1] - c[0])


def _lorentzian(p, x):
    A, x0, hw, B = p
    return A / (1 + ((x - x0) / hw) ** 2) + B


def _gaussian(p, x):
    A, x0, s, B = p
    return A * np.exp(-0.5 * ((x - x0) / s) ** 2) + B


def classify_line(x, y, threshold: float = 1.5, max_nfev: int = 2000) -> LineFit:
    """Fit Lorentzian and Gaussian profiles (centre, width, amplitude, baseline) and compare.

    Initial values come from moments of the baseline-subtracted segment.
    ``residual_ratio`` is SSR(Gaussian)/SSR(Lorentzian); above ``threshold``
    the line is Lorentzian, below ``1/threshold`` Gaussian, else ambiguous.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.size < 8:
        raise AnalysisError("need at least 8 samples")
    noise = np.std(np.diff(y)) / math.sqrt(2)
    edge = max(2, x.size // 10)
    baseline = float(np.median(np.concatenate([y[:edge], y[-edge:]])))
    height = float(np.max(y) - baseline)
    if not height > 0 or height < 5 * noise:
        raise AnalysisError("segment has no peak above the noise")
    w = np.clip(y - baseline, 0, None)
    x0 = float(np.sum(w * x) / np.sum(w))
    sigma = float(np.sqrt(np.sum(w * (x - x0) ** 2) / np.sum(w)))
    above = x[y - baseline >= height / 2]
    fwhm0 = float(above.max() - above.min()) if above.size > 1 else sigma
    fwhm0 = max(fwhm0, np.min(np.diff(x)))

    fits = {}
    for name, model, width0 in (("L", _lorentzian, fwhm0 / 2), ("G", _gaussian, fwhm0 / 2.3548)):
        res = least_squares(lambda p: model(p, x) - y, [height, x0, width0, baseline],
                            method="lm", max_nfev=max_nfev)
        if res.status <= 0:
            raise AnalysisError(f"{'Lorentzian' if name == 'L' else 'Gaussian'} fit did not converge")
        fits[name] = (res.x, float(np.sum(res.fun**2)))
    (pL, ssrL), (pG, ssrG) = fits["L"], fits["G"]
    ratio = ssrG / ssrL if ssrL > 0 else math.inf
    fwhm_L = 2 * abs(pL[2])
    fwhm_G = 2 * math.sqrt(2 * math.log(2)) * abs(pG[2])
    if ratio > threshold:
        shape, center, width = "Lorentzian", pL[1], fwhm_L
    elif ratio < 1 / threshold:
        shape, center, width = "Gaussian", pG[1], fwhm_G
    else:
        shape = "ambiguous"
        center, width = (pL[1], fwhm_L) if ssrL <= ssrG else (pG[1], fwhm_G)
    return LineFit(shape, float(center), float(width), float(ratio), float(fwhm_L), float(fwhm_G))


@dataclass(frozen=True)
class SplittingFit:
    """Coupled-oscillator parameters fitted to a transmission spectrum (ueV)."""

    splitting: float  # separation of the two normal-mode frequencies
    coupling: float
    kappa: float
    gamma: float
    cavity_detuning: float
    emitter_detuning: float
    peak_transmission: float
    peak_separation: float  # raw distance between the two transmission maxima


def normal_mode_splitting(spectrum: TransmissionSpectrum, max_nfev: int = 5000) -> SplittingFit:
    """Normal-mode splitting from a fit of the coupled-oscillator transmission model.

    The transmission maxima sit slightly outside the normal-mode frequencies
    (the emitter factor in the numerator pushes them apart), so the raw peak
    distance overestimates the splitting when ``gamma`` and ``kappa`` are not
    small against ``g``. Fitting ``g, kappa, gamma`` and both detunings and
    diagonalising the two-mode problem returns the splitting itself.
    """
    x, y = spectrum.frequency_grid, spectrum.transmission
    sep = peak_separation(spectrum)
    peaks, _ = find_peaks(y)
    top = np.sort(peaks[np.argsort(y[peaks])[-2:]])
    centre = float(np.mean(x[top]))
    # half-width of each doublet line as a rough start for kappa ~ gamma
    level = y[top].max() / 2
    above = x[y >= level]
    hw0 = max(float(above.max() - above.min()) - sep, np.min(np.diff(x))) / 2
    p0 = [sep / 2, hw0, hw0, centre, centre, float(y.max()) * 2]

    def model(p):
        g, k, gam, dc, de, tpk = p
        denom = 1j * (x - dc) + k + g**2 / (1j * (x - de) + gam)
        return tpk * k**2 / np.abs(denom) ** 2

    scale = float(np.max(y))
    res = least_squares(lambda p: (model(p) - y) / scale, p0, method="lm", max_nfev=max_nfev,
                        x_scale=[sep / 2, hw0, hw0, sep / 2, sep / 2, scale])
    if res.status <= 0:
        raise AnalysisError("coupled-oscillator fit did not converge")
    g, k, gam, dc, de, tpk = res.x
    k, gam, g = abs(k), abs(gam), abs(g)
    # eigenvalues of [[dc - i k, g], [g, de - i gam]]
    ev = np.linalg.eigvals(np.array([[dc - 1j * k, g], [g, de - 1j * gam]]))
    splitting = float(abs(ev[0].real - ev[1].real))
    return SplittingFit(splitting, float(g), float(k), float(gam), float(dc), float(de), float(tpk), sep)
