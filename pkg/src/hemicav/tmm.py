"""Transfer-matrix optics of planar multilayer stacks.

Conventions used throughout the package
---------------------------------------
* Time dependence ``exp(-i*omega*t)``; a wave travelling towards the
  substrate is ``exp(+i*k_z*z)``. Absorption therefore appears as a positive
  imaginary part of the refractive index.
* ``r`` and ``t`` are ratios of *tangential* electric-field amplitudes
  (incident side for ``r``, substrate side for ``t``). For TE this is the
  full field; for TM it differs from the total-field convention by the usual
  ``cos`` factors. Power coefficients do not depend on that choice.
* The reflection phase is ``arg(r)`` wrapped to ``(-pi, pi]``.
* Wavelengths are vacuum wavelengths in nm, thicknesses in nm, angles in
  radians measured in the incident medium.

The characteristic (Abeles) matrix of a layer with tilted admittance ``eta``
and phase thickness ``delta`` is::

    [[cos(delta),            -1j*sin(delta)/eta],
     [-1j*eta*sin(delta),     cos(delta)       ]]

with ``eta = n*cos(theta)`` for TE and ``eta = n/cos(theta)`` for TM.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import InputDomainError

__all__ = [
    "Polarization",
    "TabulatedIndex",
    "Layer",
    "LayerStack",
    "PlaneWaveQuery",
    "StackResponse",
    "stack_response",
    "sweep",
    "quarter_wave_stack",
    "quarter_wave_reflectance",
    "scale_thicknesses",
    "stop_band",
    "finesse_from_mirrors",
    "parse_stack",
    "load_stack",
    "format_stack",
    "save_stack",
]


class Polarization(str, enum.Enum):
    TE = "TE"
    TM = "TM"


@dataclass(frozen=True)
class TabulatedIndex:
    """Complex refractive index linearly interpolated over a wavelength grid (nm).

    Outside the table the end values are held constant.
    """

    wavelengths: tuple
    values: tuple

    def __post_init__(self):
        wl = np.asarray(self.wavelengths, dtype=float)
        if wl.ndim != 1 or wl.size < 2 or np.any(np.diff(wl) <= 0):
            raise InputDomainError("tabulated wavelengths must be strictly increasing")
        vals = np.asarray(self.values, dtype=complex)
        if vals.shape != wl.shape:
            raise InputDomainError("tabulated index needs one value per wavelength")
        if np.any(vals.real <= 0) or np.any(vals.imag < 0):
            raise InputDomainError("tabulated index must have real part > 0 and imag >= 0")

    def __call__(self, wavelength):
        wl = np.asarray(self.wavelengths, dtype=float)
        vals = np.asarray(self.values, dtype=complex)
        return np.interp(wavelength, wl, vals.real) + 1j * np.interp(wavelength, wl, vals.imag)

    @classmethod
    def from_csv(cls, path) -> "TabulatedIndex":
        """Read ``wavelength_nm, n[, k]`` rows; lines starting with ``#`` are skipped."""
        wl, vals = [], []
        with open(path, newline="") as fh:
            for row in csv.reader(fh):
                if not row or row[0].lstrip().startswith("#"):
                    continue
                try:
                    nums = [float(x) for x in row]
                except ValueError:
                    continue  # header line
                wl.append(nums[0])
                vals.append(complex(nums[1], nums[2] if len(nums) > 2 else 0.0))
        return cls(tuple(wl), tuple(vals))


@dataclass(frozen=True)
class Layer:
    refractive_index: complex | TabulatedIndex
    thickness: float  # nm

    def __post_init__(self):
        if not (math.isfinite(self.thickness) and self.thickness > 0):
            raise InputDomainError(f"layer thickness must be > 0 nm, got {self.thickness}")
        if not isinstance(self.refractive_index, TabulatedIndex):
            n = complex(self.refractive_index)
            if not (np.isfinite(n.real) and np.isfinite(n.imag)):
                raise InputDomainError("refractive index must be finite")
            if n.real <= 0 or n.imag < 0:
                raise InputDomainError(f"refractive index {n} needs real part > 0 and imag >= 0")
            object.__setattr__(self, "refractive_index", n)

    def index_at(self, wavelength):
        if isinstance(self.refractive_index, TabulatedIndex):
            return self.refractive_index(wavelength)
        return self.refractive_index

    @property
    def dispersive(self) -> bool:
        return isinstance(self.refractive_index, TabulatedIndex)


@dataclass(frozen=True)
class LayerStack:
    """Layers ordered from the incident side towards the (semi-infinite) substrate."""

    incident_index: float = 1.0
    layers: tuple = ()
    substrate_index: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        for name in ("incident_index", "substrate_index"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 1.0):
                raise InputDomainError(f"{name} must be a real number >= 1, got {v}")
        for layer in self.layers:
            if not isinstance(layer, Layer):
                raise InputDomainError("layers must be Layer instances")

    def __len__(self):
        return len(self.layers)

    @property
    def total_thickness(self) -> float:
        return float(sum(layer.thickness for layer in self.layers))

    @property
    def lossless(self) -> bool:
        for layer in self.layers:
            n = layer.refractive_index
            values = n.values if layer.dispersive else (n,)
            if any(complex(v).imag > 0 for v in values):
                return False
        return True


@dataclass(frozen=True)
class PlaneWaveQuery:
    wavelength: float  # nm, vacuum
    angle: float = 0.0  # rad, in the incident medium
    polarization: Polarization = Polarization.TE

    def __post_init__(self):
        object.__setattr__(self, "polarization", Polarization(self.polarization))
        _check_wavelength(self.wavelength)
        _check_angle(self.angle)


@dataclass(frozen=True)
class StackResponse:
    """Amplitude and power response. Fields are scalars or equal-shape arrays."""

    r: complex
    t: complex
    R: float
    T: float
    reflection_phase: float


def _check_wavelength(wavelength):
    wl = np.asarray(wavelength, dtype=float)
    if not np.all(np.isfinite(wl)):
        raise InputDomainError("wavelength must be finite")
    if np.any(wl <= 0):
        raise InputDomainError("wavelength must be > 0")


def _check_angle(angle):
    a = np.asarray(angle, dtype=float)
    if not np.all(np.isfinite(a)):
        raise InputDomainError("angle must be finite")
    if np.any(a < 0) or np.any(a >= np.pi / 2):
        raise InputDomainError("angle must satisfy 0 <= angle < pi/2")


def _longitudinal(n, s):
    """n*cos(theta) for transverse invariant s, on the decaying/forward branch."""
    xi = np.sqrt(np.asarray(n, dtype=complex) ** 2 - s**2 + 0j)
    flip = (xi.imag < 0) | ((xi.imag == 0) & (xi.real < 0))
    return np.where(flip, -xi, xi)


def _admittance(n, xi, pol):
    if pol is Polarization.TE:
        return xi
    return np.asarray(n, dtype=complex) ** 2 / xi


def _response_arrays(stack, wavelength, angle, pol, thickness_scale=1.0):
    wl, scale = np.broadcast_arrays(
        np.asarray(wavelength, dtype=float), np.asarray(thickness_scale, dtype=float)
    )
    n0 = stack.incident_index
    s = n0 * math.sin(angle)  # conserved transverse wavevector / k0
    xi0 = _longitudinal(n0, s)
    eta0 = _admittance(n0, xi0, pol)
    xis = _longitudinal(stack.substrate_index, s)
    etas = _admittance(stack.substrate_index, xis, pol)

    shape = wl.shape
    B = np.ones(shape, dtype=complex)
    C = np.broadcast_to(etas, shape).astype(complex)
    k0 = 2 * np.pi / wl
    for layer in reversed(stack.layers):
        n = layer.index_at(wl)
        xi = _longitudinal(n, s)
        eta = _admittance(n, xi, pol)
        delta = k0 * xi * (layer.thickness * scale)
        cd, sd = np.cos(delta), np.sin(delta)
        B, C = cd * B - 1j * sd / eta * C, -1j * eta * sd * B + cd * C

    denom = eta0 * B + C
    r = (eta0 * B - C) / denom
    t = 2 * eta0 / denom
    R = np.abs(r) ** 2
    T = 4 * eta0.real * np.real(etas) / np.abs(denom) ** 2
    phase = np.angle(r)
    phase = np.where(phase <= -np.pi, np.pi, phase)
    return r, t, R, np.broadcast_to(T, shape), phase


def stack_response(stack: LayerStack, query: PlaneWaveQuery) -> StackResponse:
    """Reflection/transmission of ``stack`` for one plane wave."""
    r, t, R, T, phase = _response_arrays(stack, query.wavelength, query.angle, query.polarization)
    return StackResponse(complex(r), complex(t), float(R), float(T), float(phase))


def sweep(stack: LayerStack, wavelengths, angle=0.0, polarization=Polarization.TE,
          thickness_scale=1.0) -> StackResponse:
    """Vectorised response over an array of wavelengths (nm).

    ``thickness_scale`` multiplies every layer thickness and broadcasts against
    ``wavelengths``, so one call can evaluate a family of uniformly scaled stacks.
    """
    _check_wavelength(wavelengths)
    _check_angle(angle)
    pol = Polarization(polarization)
    sc = np.asarray(thickness_scale, dtype=float)
    if np.any(~np.isfinite(sc)) or np.any(sc <= 0):
        raise InputDomainError("thickness scale must be finite and > 0")
    return StackResponse(*_response_arrays(stack, wavelengths, float(angle), pol, sc))


def scale_thicknesses(stack: LayerStack, factor: float) -> LayerStack:
    if not (math.isfinite(factor) and factor > 0):
        raise InputDomainError("scale factor must be finite and > 0")
    return replace(
        stack, layers=tuple(Layer(l.refractive_index, l.thickness * factor) for l in stack.layers)
    )


def quarter_wave_stack(n_high: float, n_low: float, substrate_index: float,
                       center_wavelength: float, num_pairs: int, high_first: bool = True,
                       terminate_high: bool = False, incident_index: float = 1.0) -> LayerStack:
    """Periodic quarter-wave mirror.

    Layers run ``(H L) * num_pairs`` from the incident side when ``high_first``
    (else ``(L H) * num_pairs``). ``terminate_high`` appends one more H layer on
    the substrate side, giving the symmetric ``H (L H)^N`` design; it is only
    meaningful for high-first stacks.
    """
    if not (n_high > 1 and n_low > 1):
        raise InputDomainError("quarter-wave indices must be > 1")
    if int(num_pairs) != num_pairs or num_pairs < 1:
        raise InputDomainError("num_pairs must be an integer >= 1")
    if not (center_wavelength > 0 and math.isfinite(center_wavelength)):
        raise InputDomainError("center_wavelength must be > 0")
    if terminate_high and not high_first:
        raise InputDomainError("terminate_high requires a high-first stack")
    hi = Layer(complex(n_high), center_wavelength / (4 * n_high))
    lo = Layer(complex(n_low), center_wavelength / (4 * n_low))
    pair = (hi, lo) if high_first else (lo, hi)
    layers = list(pair) * int(num_pairs)
    if terminate_high:
        layers.append(hi)
    return LayerStack(incident_index, tuple(layers), substrate_index)


def quarter_wave_reflectance(n_high, n_low, substrate_index, num_pairs, incident_index=1.0):
    """Closed-form normal-incidence reflectance of ``H (L H)^N`` at its design wavelength."""
    y = (n_high / n_low) ** (2 * num_pairs) * n_high**2 / substrate_index / incident_index
    return ((1 - y) / (1 + y)) ** 2


def stop_band(stack: LayerStack, angle: float = 0.0, polarization=Polarization.TE,
              reflectance_threshold: float = 0.95, scan_range=(400.0, 1200.0),
              scan_step: float = 0.5, tolerance: float = 0.01):
    """Contiguous wavelength interval around the reflectance maximum with R >= threshold.

    Returns ``(lambda_min, lambda_max)`` in nm, or ``None`` when R stays below the
    threshold over the scan. Edges are bisected to ``tolerance`` nm; an edge that
    coincides with the scan boundary is returned as that boundary.
    """
    lo, hi = (float(x) for x in scan_range)
    if not (hi > lo):
        raise InputDomainError("scan_range must be an ordered (low, high) pair with low < high")
    if not scan_step > 0:
        raise InputDomainError("scan_step must be > 0")
    if not 0 < reflectance_threshold < 1:
        raise InputDomainError("reflectance_threshold must lie in (0, 1)")
    pol = Polarization(polarization)
    n = int(math.ceil((hi - lo) / scan_step)) + 1
    grid = np.linspace(lo, hi, n)
    R = sweep(stack, grid, angle, pol).R
    i_max = int(np.argmax(R))
    if R[i_max] < reflectance_threshold:
        return None

    def refl(wl):
        return float(sweep(stack, np.array([wl]), angle, pol).R[0])

    def bisect(inside, outside):
        while abs(outside - inside) > tolerance:
            mid = 0.5 * (inside + outside)
            if refl(mid) >= reflectance_threshold:
                inside = mid
            else:
                outside = mid
        return 0.5 * (inside + outside)

    i = i_max
    while i > 0 and R[i - 1] >= reflectance_threshold:
        i -= 1
    left = grid[0] if i == 0 else bisect(grid[i], grid[i - 1])
    j = i_max
    while j < n - 1 and R[j + 1] >= reflectance_threshold:
        j += 1
    right = grid[-1] if j == n - 1 else bisect(grid[j], grid[j + 1])
    return float(left), float(right)


def finesse_from_mirrors(R1: float, R2: float, round_trip_intensity_loss: float = 0.0) -> float:
    """Airy finesse ``pi*sqrt(rho)/(1-rho)`` with ``rho = sqrt(R1*R2*(1-loss))``."""
    for name, v in (("R1", R1), ("R2", R2)):
        if not (0 < v < 1):
            raise InputDomainError(f"{name} must lie in (0, 1), got {v}")
    if not (0 <= round_trip_intensity_loss < 1):
        raise InputDomainError("round-trip loss must lie in [0, 1)")
    rho = math.sqrt(R1 * R2 * (1 - round_trip_intensity_loss))
    if rho >= 1:
        raise InputDomainError("round-trip amplitude factor must be < 1")
    return math.pi * math.sqrt(rho) / (1 - rho)


# --- stack files -----------------------------------------------------------
#
#   # free comment
#   incident 1.0
#   substrate 1.5
#   2.30 0.0 81.52          <- index_real index_imag thickness_nm
#   table:sio2.csv 129.31   <- tabulated index (csv relative to the stack file)
#
# Any other "key value" header line (e.g. "scale 1.08") is kept and returned.

def parse_stack(text: str, base_dir: Path | str = ".") -> tuple[LayerStack, dict]:
    base_dir = Path(base_dir)
    incident, substrate = 1.0, 1.0
    headers: dict = {}
    layers = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            if parts[0].startswith("table:"):
                if len(parts) != 2:
                    raise ValueError("expected 'table:<file> thickness_nm'")
                idx = TabulatedIndex.from_csv(base_dir / parts[0][len("table:"):])
                layers.append(Layer(idx, float(parts[1])))
            elif parts[0][0].isalpha():
                if len(parts) != 2:
                    raise ValueError("header lines are 'key value'")
                key, value = parts[0].lower(), parts[1]
                if key == "incident":
                    incident = float(value)
                elif key == "substrate":
                    substrate = float(value)
                else:
                    headers[key] = value
            else:
                if len(parts) != 3:
                    raise ValueError("expected 'index_real index_imag thickness_nm'")
                nr, ni, d = (float(p) for p in parts)
                layers.append(Layer(complex(nr, ni), d))
        except (ValueError, OSError) as exc:
            raise InputDomainError(f"stack file line {lineno}: {exc}") from exc
    return LayerStack(incident, tuple(layers), substrate), headers


def load_stack(path) -> tuple[LayerStack, dict]:
    path = Path(path)
    return parse_stack(path.read_text(), base_dir=path.parent)


def format_stack(stack: LayerStack, headers: dict | None = None) -> str:
    lines = [f"incident {stack.incident_index!r}", f"substrate {stack.substrate_index!r}"]
    for key, value in (headers or {}).items():
        lines.append(f"{key} {value}")
    for layer in stack.layers:
        if layer.dispersive:
            raise InputDomainError("tabulated layers cannot be written back inline")
        n = layer.refractive_index
        lines.append(f"{n.real!r} {n.imag!r} {layer.thickness!r}")
    return "\n".join(lines) + "\n"


def save_stack(stack: LayerStack, path, headers: dict | None = None) -> None:
    Path(path).write_text(format_stack(stack, headers))
