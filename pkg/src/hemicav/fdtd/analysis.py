"""Resonance extraction from probe time series."""

from __future__ import annotations

import math

import numpy as np
from scipy.signal import find_peaks

from ..errors import AnalysisError

__all__ = ["resonances", "strongest_resonance", "resolution_limit", "spectrum"]

# peaks must stand this far (power ratio) above the median spectral level
NOISE_FACTOR = 100.0
# peaks this far (power ratio) below the strongest one are numerical leakage ripple
DYNAMIC_RANGE = 1e-8
_PAD = 8


def resolution_limit(record, probe: int = 0) -> float:
    """Smallest resolvable tone spacing (THz): the Hann main-lobe half-width ``2/T``."""
    n = record.late(probe).size
    return 2.0 / (n * record.time_step) * 1e3


def spectrum(series, time_step: float):
    """Hann-windowed power spectrum ``(f_THz, P)`` of a real series sampled every ``time_step`` fs."""
    x = np.asarray(series, dtype=float)
    x = x - x.mean()
    n = x.size
    nfft = 1 << int(math.ceil(math.log2(_PAD * n)))
    P = np.abs(np.fft.rfft(x * np.hanning(n), nfft)) ** 2
    f = np.fft.rfftfreq(nfft, d=time_step) * 1e3
    return f, P


def _parabolic(f, logP, j):
    if j == 0 or j == len(f) - 1:
        return f[j]
    a, b, c = logP[j - 1], logP[j], logP[j + 1]
    den = a - 2 * b + c
    shift = 0.5 * (a - c) / den if den != 0 else 0.0
    return f[j] + shift * (f[1] - f[0])


def _decay_rate(X, f, n, dt_fs, f0, half_band):
    """Amplitude decay rate (1/fs) of the band ``f0 +- half_band`` from its analytic envelope.

    ``X`` is the FFT of the record zero-padded to twice its length. The band
    is shifted to baseband and inverse transformed on its own short grid,
    which keeps the envelope and costs only the band's bins.
    """
    band = np.nonzero((f >= f0 - half_band) & (f <= f0 + half_band))[0]
    if band.size < 4:
        raise AnalysisError("band too narrow for a decay fit")
    nb = 1 << int(math.ceil(math.log2(band.size)))
    env = np.abs(np.fft.ifft(X[band], nb))
    t = np.arange(nb) * (X.size / nb) * dt_fs
    keep = t < n * dt_fs
    env, t = env[keep], t[keep]
    lo, hi = int(0.15 * env.size), int(0.85 * env.size)
    seg, ts = env[lo:hi], t[lo:hi]
    ok = seg > seg.max() * 1e-6
    if ok.sum() < 4:
        raise AnalysisError("band envelope too short for a decay fit")
    slope = np.polyfit(ts[ok], np.log(seg[ok]), 1)[0]
    return -slope


def resonances(record, probe: int = 0, noise_factor: float = NOISE_FACTOR, band=None,
               dynamic_range: float = DYNAMIC_RANGE):
    """``[(frequency_THz, Q), ...]`` sorted by frequency from the source-free part of a record.

    Peaks of the Hann-windowed spectrum are located by parabolic refinement
    of the log power. Weaker peaks inside a stronger peak's main lobe, or
    less than 10x above its side-lobe envelope ``1/(pi x |1-x^2|)`` (``x`` the
    separation in units of ``1/T``), are discarded. Q follows from the decay of
    the band-filtered envelope; a decay below the record's resolution gives
    ``Q = inf``. ``band=(f_lo, f_hi)`` restricts the search, which is useful
    to skip the quasi-static response a broadband soft source leaves behind.
    """
    x = record.late(probe)
    if x.size < 64:
        raise AnalysisError("record has fewer than 64 source-free samples")
    dt = record.time_step
    f, P = spectrum(x, dt)
    if not np.any(P > 0):
        raise AnalysisError("record is identically zero")
    floor = float(np.median(P[1:]))
    idx, _ = find_peaks(P, height=noise_factor * floor)
    idx = [j for j in idx if j > 0]
    if band is not None:
        idx = [j for j in idx if band[0] <= f[j] <= band[1]]
    if not idx:
        raise AnalysisError("no spectral peak above the noise floor")
    T = x.size * dt * 1e-3  # ps, so 1/T is in THz
    idx = np.asarray(idx)
    idx = idx[P[idx] > P[idx].max() * dynamic_range]
    order = idx[np.argsort(P[idx])[::-1]]
    logP = np.log(P + 1e-300)
    kept_f, kept_p = [], []
    for j in order:
        fj, pj = _parabolic(f, logP, j), P[j]
        if kept_f:
            x_sep = np.abs(fj - np.asarray(kept_f)) * T  # in units of 1/T
            bound = np.where(x_sep <= 2, np.inf,
                             10 * np.asarray(kept_p) / (np.pi * x_sep * np.abs(1 - x_sep**2)) ** 2)
            if np.any(pj < bound):
                continue
        kept_f.append(fj)
        kept_p.append(pj)
    freqs = sorted(kept_f)
    nfft = 1 << int(math.ceil(math.log2(2 * x.size)))
    X = np.fft.fft(x - x.mean(), nfft)
    fX = np.fft.fftfreq(nfft, d=dt) * 1e3
    out = []
    for fk in freqs:
        gaps = [abs(fk - g) for g in freqs if g != fk]
        half = min(0.25 * fk, 0.5 * min(gaps)) if gaps else 0.25 * fk
        half = max(half, 4.0 / T)
        alpha = _decay_rate(X, fX, x.size, dt, fk, half)
        resolvable = alpha * x.size * dt > 1e-3
        q = math.pi * fk * 1e-3 / alpha if resolvable and alpha > 0 else math.inf
        out.append((float(fk), float(q)))
    return out


def strongest_resonance(record, probe: int = 0, band=None, noise_factor: float = NOISE_FACTOR):
    """``(frequency_THz, Q)`` of the resonance with the largest spectral peak in ``band``.

    In a dense spectrum this picks the mode the source and probe couple to
    best, e.g. the fundamental under an on-axis transverse source.
    """
    found = resonances(record, probe, noise_factor=noise_factor, band=band)
    f, P = spectrum(record.late(probe), record.time_step)
    return max(found, key=lambda fq: P[int(np.argmin(np.abs(f - fq[0])))])
