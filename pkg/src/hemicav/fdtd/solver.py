"""Time stepping, ringdown runs, energy bookkeeping and mode extraction.

Internally the solver works in normalised units: lengths in cells, time in
``cell / c``. Public inputs and outputs are in um, fs and THz.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numba
import numpy as np
from scipy.constants import c as SPEED_OF_LIGHT

from ..errors import AnalysisError, BuildError, InputDomainError
from . import kernel
from .domain import MIN_RESOLUTION, SimulationDomain

__all__ = [
    "SourceSpec",
    "ProbeRecord",
    "Fields",
    "ModeProfile",
    "courant_limit",
    "time_step",
    "step",
    "run_ringdown",
    "field_energy",
    "mode_profile",
    "e_coefficients",
]

E_COMPONENTS = ("e_r", "e_phi", "e_z")
# "e_x" drives e_r and -e_phi together: a field linearly polarized along x (m = 1 only)
SOURCE_COMPONENTS = E_COMPONENTS + ("e_x",)


def courant_limit(m: int) -> float:
    """Stable ``c*dt/cell`` bound used for azimuthal order ``m``.

    The axis terms make the BOR scheme stiffer than plain 2-D Yee. Measured
    limits on this grid are about 0.670, 0.618, 0.425, 0.306 and 0.236 for
    ``m = 0..4``; the bounds used here are ``0.9/sqrt(2)`` for ``m = 0`` and
    ``1/(m+1)`` otherwise, all below the measured values and below ``1/sqrt(2)``.
    """
    if m == 0:
        return 0.9 / math.sqrt(2)
    return 1.0 / (m + 1)


def time_step(domain: SimulationDomain, courant: float = 0.99) -> float:
    """Normalised time step ``courant * courant_limit(m)``; ``courant`` must lie in (0, 0.99]."""
    if not 0 < courant <= 0.99:
        raise InputDomainError("courant factor must lie in (0, 0.99]")
    return courant * courant_limit(domain.azimuthal_order)


def _unit_fs(domain):
    return domain.cell_size * 1e-9 / SPEED_OF_LIGHT * 1e15


@dataclass(frozen=True)
class SourceSpec:
    """Soft Gaussian-modulated sinusoid ``exp(-((t-t0)/tau)^2) sin(2 pi f (t-t0))``.

    ``bandwidth`` is the full spectral width at 1/e amplitude, so
    ``tau = 2/(pi*bandwidth)``; the pulse is centred at ``t0 = 4 tau`` and
    switched off at ``8 tau``. ``radial_width`` (um) spreads the source along
    its grid row with weight ``exp(-(r/w)^2)``; ``None`` is a point source.
    ``field_component="e_x"`` (order ``m = 1`` only) drives ``e_r`` and
    ``-e_phi`` together, a transverse field linearly polarized along x, which
    favours the fundamental mode over the ring-shaped ones.
    """

    position: tuple  # (r, z) um
    center_frequency: float  # THz
    bandwidth: float  # THz
    field_component: str = "e_r"
    amplitude: float = 1.0
    radial_width: float | None = None  # um

    def __post_init__(self):
        if self.field_component not in SOURCE_COMPONENTS:
            raise InputDomainError(f"source component must be one of {SOURCE_COMPONENTS}")
        if not self.bandwidth > 0:
            raise InputDomainError("bandwidth must be > 0")
        if not self.center_frequency > 0:
            raise InputDomainError("center_frequency must be > 0")
        if self.radial_width is not None and not self.radial_width > 0:
            raise InputDomainError("radial_width must be > 0")

    @property
    def tau(self) -> float:
        """Envelope time constant in fs."""
        return 2.0 / (math.pi * self.bandwidth) * 1e3

    @property
    def duration(self) -> float:
        """Time (fs) after which the source is off."""
        return 8 * self.tau

    @property
    def max_frequency(self) -> float:
        return self.center_frequency + 0.5 * self.bandwidth

    def waveform(self, t_fs):
        t = np.asarray(t_fs, dtype=float) - 4 * self.tau
        w = self.amplitude * np.exp(-((t / self.tau) ** 2)) * np.sin(2 * np.pi * self.center_frequency * 1e-3 * t)
        return np.where(np.asarray(t_fs) < self.duration, w, 0.0)


@dataclass
class Fields:
    e_r: np.ndarray
    e_phi: np.ndarray
    e_z: np.ndarray
    h_r: np.ndarray
    h_phi: np.ndarray
    h_z: np.ndarray
    step: int = 0

    @classmethod
    def zeros(cls, domain: SimulationDomain, dtype=np.float64) -> "Fields":
        return cls(*(np.zeros(s, dtype=dtype) for s in _zeros_shape(domain)))

    def arrays(self):
        return (self.e_r, self.e_phi, self.e_z, self.h_r, self.h_phi, self.h_z)

    def copy(self) -> "Fields":
        return Fields(*(a.copy() for a in self.arrays()), step=self.step)


@dataclass(frozen=True)
class ProbeRecord:
    probes: tuple  # ((component, r_um, z_um), ...)
    time_step: float  # fs
    series: np.ndarray  # (n_steps, n_probes)
    source_end: int  # first step with the source off
    courant_factor: float

    def __post_init__(self):
        # normalised dt over the 2-D bound, independent of the cell size
        if self.courant_factor > 0.99 + 1e-12:
            raise InputDomainError("time step violates the Courant bound with margin 0.99")

    @property
    def times(self) -> np.ndarray:
        return (np.arange(self.series.shape[0]) + 1) * self.time_step

    def late(self, probe: int = 0) -> np.ndarray:
        return self.series[self.source_end:, probe]


@dataclass(frozen=True)
class ModeProfile:
    resonance_frequency: float  # THz
    quality_factor: float
    energy_density_map: np.ndarray  # (Nr, Nz) per cell, arbitrary units, >= 0
    waist_radius: float | None  # um; None when there is no transverse confinement
    effective_mode_volume: float  # um^3
    waist_plane: float  # um, z of the plane used for the waist
    transverse_profile: tuple  # (r_um, |E| amplitude normalised to 1)
    dbr_antinode: dict | None = None

    def to_dict(self):
        return {
            "resonance_frequency_THz": self.resonance_frequency,
            "quality_factor": None if math.isinf(self.quality_factor) else self.quality_factor,
            "waist_radius_um": self.waist_radius,
            "effective_mode_volume_um3": self.effective_mode_volume,
            "waist_plane_um": self.waist_plane,
            "dbr_antinode": self.dbr_antinode,
        }


def _edge_eps(domain):
    """Permittivity and free-space mask at each E node (``None`` entries never update)."""
    eps, pec = domain.material_map, domain.pec_mask
    nr, nz = eps.shape
    m = domain.azimuthal_order
    big = np.inf
    e = np.where(pec, big, eps)  # PEC cells poison every adjacent tangential node

    # e_r: cells (i, k-1) and (i, k)
    er = np.full((nr, nz + 1), big)
    er[:, 1:nz] = 0.5 * (e[:, :-1] + e[:, 1:])
    # e_phi: four surrounding cells
    ep = np.full((nr + 1, nz + 1), big)
    ep[1:nr, 1:nz] = 0.25 * (e[:-1, :-1] + e[1:, :-1] + e[:-1, 1:] + e[1:, 1:])
    # e_z: cells (i-1, k) and (i, k)
    ez = np.full((nr + 1, nz), big)
    ez[1:nr, :] = 0.5 * (e[:-1, :] + e[1:, :])
    if m == 0:
        ez[0, :] = e[0, :]
    return er, ep, ez


def e_coefficients(domain: SimulationDomain, dt: float, dtype=np.float64):
    """``dt/eps`` at each E node, zero on PEC-adjacent, wall and axis-forbidden nodes."""
    return tuple(np.where(np.isfinite(x), dt / x, 0.0).astype(dtype) for x in _edge_eps(domain))


def _weights(domain):
    """Radial quadrature weights ``r`` (cells) per component.

    The ``m = 0`` axis ``e_z`` node owns the disc of radius 1/2, weight 1/8.
    The ``m = 1`` axis nodes are copies of their neighbours and carry none.
    """
    nr, nz = domain.shape
    ri = np.arange(nr + 1, dtype=float)[:, None]
    rh = (np.arange(nr, dtype=float) + 0.5)[:, None]
    w_ez = ri.copy()
    w_ez[0] = 1.0 / 8.0
    return (rh, ri, w_ez, ri, rh, rh)


def field_energy(domain: SimulationDomain, fields: Fields, previous: Fields | None = None) -> float:
    """Discrete electromagnetic energy (normalised units, per azimuthal weight).

    With ``previous`` (the fields one step earlier) the leapfrog invariant
    ``1/2 sum eps E^n . E^(n+1) w + 1/2 sum mu (H^(n+1/2))^2 w`` is returned; it is
    exactly conserved by the update in a closed lossless box.
    Without it the plain ``1/2 sum (eps E^2 + mu H^2) w`` is returned.
    """
    eps_e = _edge_eps(domain)
    w = _weights(domain)
    cur = fields.arrays()
    prev = previous.arrays() if previous is not None else cur
    total = 0.0
    for j in range(3):
        eps_j = np.where(np.isfinite(eps_e[j]), eps_e[j], 0.0)
        total += 0.5 * float(np.sum(eps_j * cur[j] * prev[j] * w[j]))
    for j in range(3, 6):
        total += 0.5 * float(np.sum(cur[j] ** 2 * w[j]))
    return total


_EMPTY_C = np.zeros((1, 1), dtype=np.complex128)
_EMPTY_I = np.zeros(0, dtype=np.int64)
_EMPTY_F = np.zeros(0)


_PRECISION = {"double": np.float64, "single": np.float32}


def _dtype(precision):
    try:
        return _PRECISION[precision]
    except KeyError:
        raise InputDomainError(f"precision must be one of {sorted(_PRECISION)}") from None


def _advance(domain, fields, coeffs, dt, nsteps, source=None, probes=None, record=None,
             omega=0.0, acc_start=None, phasors=None, acc_stride=1, acc_count=1):
    if source is None:
        src = (_EMPTY_I, _EMPTY_I, _EMPTY_I, _EMPTY_F, np.zeros(nsteps))
    else:
        src = source
    if probes is None:
        probes = (_EMPTY_I, _EMPTY_I, _EMPTY_I)
        record = np.zeros((nsteps, 0))
    if phasors is None:
        phasors = (_EMPTY_C,) * 6
        acc_start = nsteps
    dt_typed = fields.e_r.dtype.type(dt)
    parallel = numba.get_num_threads() > 1
    kernel.run_steps(*fields.arrays(), *coeffs, dt_typed, int(domain.azimuthal_order),
                     int(fields.step), int(nsteps), parallel, *src, *probes, record,
                     float(omega), int(acc_start), int(acc_stride), int(acc_count), *phasors)
    fields.step += nsteps
    return fields


def step(fields: Fields, domain: SimulationDomain, dt: float | None = None) -> Fields:
    """Advance ``fields`` by one source-free time step in place and return them."""
    dt = time_step(domain) if dt is None else dt
    return _advance(domain, fields, e_coefficients(domain, dt, fields.e_r.dtype), dt, 1)


def _row_nodes(domain, source, coef, comp, k0, sign):
    """Source nodes of one component along grid row ``k0``: ``(comp, i, k, weight)`` arrays."""
    offset = 0.5 if comp == 0 else 0.0  # e_r nodes sit at half-integer radii
    k0 = min(k0, coef.shape[1] - 1)
    if source.radial_width is None:
        i0, _ = domain.node_index(*source.position)
        idx = np.array([min(i0, coef.shape[0] - 1)])
        wts = np.array([1.0])
    else:
        r = (np.arange(coef.shape[0]) + offset) * domain.cell_um
        wts = np.exp(-((r / source.radial_width) ** 2))
        idx = np.nonzero(wts > 1e-6)[0]
        wts = wts[idx]
    w = sign * wts * coef[idx, k0]
    keep = w != 0
    return (np.full(keep.sum(), comp, dtype=np.int64), idx[keep].astype(np.int64),
            np.full(keep.sum(), k0, dtype=np.int64), w[keep].astype(float))


def _source_arrays(domain, source, coeffs, dt, nsteps, t_offset_fs=0.0):
    lam_min = SPEED_OF_LIGHT / (source.max_frequency * 1e12) * 1e6
    if domain.cell_um > lam_min / (MIN_RESOLUTION * domain.n_max) * (1 + 1e-9):
        raise BuildError(
            f"cell {domain.cell_size:.4g} nm too coarse for the source band "
            f"(needs <= lambda_min/({MIN_RESOLUTION} n_max) = {lam_min / (MIN_RESOLUTION * domain.n_max) * 1e3:.4g} nm)"
        )
    _, k0 = domain.node_index(*source.position)
    if source.field_component == "e_x":
        if domain.azimuthal_order != 1:
            raise BuildError("an e_x source needs azimuthal order m = 1")
        parts = [_row_nodes(domain, source, coeffs[0], 0, k0, 1.0),
                 _row_nodes(domain, source, coeffs[1], 1, k0, -1.0)]
    else:
        comp = E_COMPONENTS.index(source.field_component)
        parts = [_row_nodes(domain, source, coeffs[comp], comp, k0, 1.0)]
    comp, idx, kk, w = (np.concatenate(a) for a in zip(*parts))
    if w.size == 0:
        raise BuildError("source lies on a PEC, wall or axis-forbidden node")
    t = (np.arange(nsteps) + 1) * dt * _unit_fs(domain) + t_offset_fs
    return comp, idx, kk, w, source.waveform(t).astype(float)


def _probe_arrays(domain, probes):
    comps, ii, kk, norm = [], [], [], []
    shapes = dict(zip(kernel.COMPONENTS, _zeros_shape(domain)))
    for p in probes:
        if len(p) == 2:
            comp, (r, z) = "e_r", p
        else:
            comp, r, z = p
        if comp not in kernel.COMPONENTS:
            raise BuildError(f"unknown probe component {comp!r}")
        i, k = domain.node_index(r, z)
        nr_c, nz_c = shapes[comp]
        i, k = min(i, nr_c - 1), min(k, nz_c - 1)
        comps.append(kernel.COMPONENTS.index(comp))
        ii.append(i)
        kk.append(k)
        norm.append((comp, float(r), float(z)))
    return (np.array(comps, dtype=np.int64), np.array(ii, dtype=np.int64),
            np.array(kk, dtype=np.int64)), tuple(norm)


def _zeros_shape(domain):
    nr, nz = domain.shape
    return ((nr, nz + 1), (nr + 1, nz + 1), (nr + 1, nz), (nr + 1, nz), (nr, nz), (nr, nz + 1))


def run_ringdown(domain: SimulationDomain, source: SourceSpec, probes, duration: float,
                 courant: float = 0.99, precision: str = "double") -> ProbeRecord:
    """Run from rest for ``duration`` optical cycles of the source centre frequency.

    The source is soft (added to the update) so once it switches off the
    record is source-free. Q values up to ~1e4 need about 2000 cycles; shorter
    runs still locate frequencies to the spectral resolution of the record.
    ``precision="single"`` halves memory traffic on large grids.
    """
    dtype = _dtype(precision)
    if not duration > 0:
        raise InputDomainError("duration must be > 0 cycles")
    dt = time_step(domain, courant)
    unit = _unit_fs(domain)
    total_fs = duration / (source.center_frequency * 1e-3)
    nsteps = int(math.ceil(total_fs / (dt * unit)))
    coeffs = e_coefficients(domain, dt, dtype)
    probe_idx, probe_desc = _probe_arrays(domain, probes)
    src = _source_arrays(domain, source, coeffs, dt, nsteps)
    record = np.zeros((nsteps, probe_idx[0].size))
    fields = Fields.zeros(domain, dtype)
    _advance(domain, fields, coeffs, dt, nsteps, src, probe_idx, record)
    source_end = min(nsteps, int(math.ceil(source.duration / (dt * unit))))
    return ProbeRecord(probe_desc, dt * unit, record, source_end, courant)


def _cell_energy(domain, ph):
    """Time-averaged energy density per cell from the six phasor arrays."""
    er, ep, ez, hr, hp, hz = (np.abs(a) ** 2 for a in ph)
    eps = domain.material_map
    e2 = (0.5 * (er[:, :-1] + er[:, 1:])
          + 0.25 * (ep[:-1, :-1] + ep[1:, :-1] + ep[:-1, 1:] + ep[1:, 1:])
          + 0.5 * (ez[:-1, :] + ez[1:, :]))
    h2 = 0.5 * (hr[:-1, :] + hr[1:, :]) + hp + 0.5 * (hz[:, :-1] + hz[:, 1:])
    u = 0.25 * (eps * e2 + h2)
    u[domain.pec_mask] = 0.0
    return u


def _plane_intensity(ph, k):
    """``|E|^2`` along node row ``k`` at radii ``(i + 1/2)`` cells."""
    er, ep, ez = (np.abs(a) ** 2 for a in ph[:3])
    row_ez = ez[:, k] if k == 0 else (ez[:, min(k, ez.shape[1] - 1)] + ez[:, k - 1]) * 0.5
    return er[:, k] + 0.5 * (ep[:-1, k] + ep[1:, k]) + 0.5 * (row_ez[:-1] + row_ez[1:])


def _one_over_e_radius(r, amp, r_limit):
    peak = int(np.argmax(amp))
    level = amp[peak] / math.e
    below = np.nonzero((amp < level) & (np.arange(amp.size) > peak))[0]
    if below.size == 0:
        return None
    j = int(below[0])
    r_cross = r[j - 1] + (amp[j - 1] - level) / (amp[j - 1] - amp[j]) * (r[j] - r[j - 1])
    return float(r_cross) if r_cross < r_limit else None


def mode_profile(domain: SimulationDomain, resonance_frequency: float, source: SourceSpec,
                 settle_cycles: float = 50, average_cycles: float = 400,
                 bandwidth: float | None = None, courant: float = 0.99,
                 precision: str = "double") -> ModeProfile:
    """Narrowband re-excitation at ``resonance_frequency`` and time-averaged energy density.

    The source is re-centred on the resonance (``bandwidth`` overrides the
    source's own). After it switches off and ``settle_cycles`` pass, field
    phasors at the resonance are accumulated over ``average_cycles`` under a
    Hann taper; their squared magnitudes give ``u(r, z)``, which filters out
    neighbouring modes the narrowband pulse still touched. The waist is the 1/e amplitude radius
    of ``|E|`` on the DBR surface plane, or on the first antinode plane above
    the bottom mirror when there is no DBR.
    """
    dtype = _dtype(precision)
    from .analysis import resolution_limit, resonances

    if not resonance_frequency > 0:
        raise InputDomainError("resonance_frequency must be > 0")
    src = replace(source, center_frequency=resonance_frequency,
                  bandwidth=bandwidth if bandwidth is not None else source.bandwidth)
    dt = time_step(domain, courant)
    unit = _unit_fs(domain)
    period_steps = 1e3 / resonance_frequency / (dt * unit)
    n_src = int(math.ceil(src.duration / (dt * unit)))
    acc_start = n_src + int(math.ceil(settle_cycles * period_steps))
    nsteps = acc_start + int(math.ceil(average_cycles * period_steps))
    coeffs = e_coefficients(domain, dt, dtype)
    s = _source_arrays(domain, src, coeffs, dt, nsteps)
    probe = ("e_r" if src.field_component == "e_x" else src.field_component,) + tuple(src.position)
    probe_idx, _ = _probe_arrays(domain, [probe])
    record = np.zeros((nsteps, 1))
    fields = Fields.zeros(domain, dtype)
    phasors = tuple(np.zeros(a.shape, dtype=np.complex128) for a in fields.arrays())
    omega = 2 * math.pi * resonance_frequency * 1e-3 * unit  # rad per normalised time unit
    # eight samples per period are plenty for a single-frequency projection
    stride = max(1, int(period_steps // 8))
    count = (nsteps - acc_start + stride - 1) // stride
    _advance(domain, fields, coeffs, dt, nsteps, s, probe_idx, record, omega, acc_start, phasors, stride, count)

    rec = ProbeRecord((probe,), dt * unit, record, acc_start, courant)
    try:
        found = resonances(rec)
    except AnalysisError as exc:
        raise AnalysisError(f"resonance at {resonance_frequency} THz not excited: {exc}") from exc
    f_peak, q = min(found, key=lambda fq: abs(fq[0] - resonance_frequency))
    if abs(f_peak - resonance_frequency) > 3 * resolution_limit(rec):
        raise AnalysisError(
            f"unresolved resonance: strongest nearby peak at {f_peak:.4f} THz, requested {resonance_frequency:.4f} THz"
        )

    u = _cell_energy(domain, phasors)
    cell = domain.cell_um
    nr, nz = domain.shape
    rc = (np.arange(nr) + 0.5) * cell
    umax = float(u.max())
    if not umax > 0:
        raise AnalysisError("mode energy is zero")
    v_eff = float(np.sum(u * (2 * np.pi * rc[:, None] * cell**2)) / umax)

    if domain.dbr_layers:
        k_plane = domain.dbr_top
    else:
        # first antinode of |E|^2 on axis above the bottom mirror
        axis = np.array([_plane_intensity(phasors, k)[0] for k in range(nz)])
        half_wave = max(2, int(round(0.5 * SPEED_OF_LIGHT / (resonance_frequency * 1e12) * 1e6
                                     / math.sqrt(domain.material_map[0, 0]) / cell)))
        k_plane = int(np.argmax(axis[: half_wave + 1]))
    amp = np.sqrt(_plane_intensity(phasors, k_plane))
    amp = amp / amp.max() if amp.max() > 0 else amp
    free = np.nonzero(domain.pec_mask[:, min(k_plane, nz - 1)])[0]
    r_wall = rc[free[0]] if free.size else rc[-1]
    waist = _one_over_e_radius(rc, amp, 0.8 * r_wall)

    antinode = None
    if domain.dbr_layers:
        start, stop, n_first = domain.dbr_layers[0]
        column = u[0, start:stop]
        j = int(np.argmax(column))
        antinode = {
            "depth_below_surface_um": float((domain.dbr_top - (start + j + 0.5)) * cell),
            "relative_energy_density": float(column[j] / umax),
            "interior_maximum": bool(0 < j < column.size - 1),
            "layer_index": float(n_first),
        }
    return ModeProfile(
        resonance_frequency=float(f_peak),
        quality_factor=float(q),
        energy_density_map=u,
        waist_radius=waist,
        effective_mode_volume=v_eff,
        waist_plane=float(k_plane * cell),
        transverse_profile=(rc, amp),
        dbr_antinode=antinode,
    )
