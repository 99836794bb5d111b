"""Discretized body-of-revolution geometry for the cavity solver.

The grid is uniform, ``dr = dz``, with cells ``(i, k)`` spanning
``[i, i+1] x [k, k+1]`` in units of the cell size. The planar mirror side
sits at the bottom: a PEC wall at ``z = 0`` backs the optional substrate slab
and the DBR, whose first layer faces the cavity. The curved mirror is a PEC
region above the cavity, the outer radial wall and the top wall are PEC.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..coating import DimpleGeometry
from ..errors import BuildError, InputDomainError
from ..modes import CavityGeometry
from ..tmm import LayerStack

__all__ = ["SimulationDomain", "build_domain", "rasterize_layers", "MIN_RESOLUTION"]

MIN_RESOLUTION = 15


@dataclass(frozen=True)
class SimulationDomain:
    radial_extent: float  # um, inner face of the outer PEC wall
    axial_extent: float  # um
    cell_size: float  # nm
    azimuthal_order: int
    material_map: np.ndarray  # (Nr, Nz) relative permittivity per cell
    pec_mask: np.ndarray  # (Nr, Nz) bool
    resolution: float = 20.0  # cells per design wavelength in the densest medium
    design_wavelength: float = 750.0  # nm
    dbr_top: int = 0  # node row of the DBR surface (first cavity plane)
    dbr_layers: tuple = ()  # (start_row, stop_row, index) from the cavity side down
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        eps = np.asarray(self.material_map, dtype=float)
        pec = np.asarray(self.pec_mask, dtype=bool)
        if eps.ndim != 2 or eps.shape != pec.shape:
            raise BuildError("material_map and pec_mask must be matching 2-D grids")
        if np.any(eps < 1) or not np.all(np.isfinite(eps)):
            raise BuildError("relative permittivity must be finite and >= 1")
        if int(self.azimuthal_order) != self.azimuthal_order or self.azimuthal_order < 0:
            raise BuildError("azimuthal_order must be a non-negative integer")
        if not self.cell_size > 0:
            raise BuildError("cell_size must be > 0")
        object.__setattr__(self, "material_map", eps)
        object.__setattr__(self, "pec_mask", pec)
        object.__setattr__(self, "azimuthal_order", int(self.azimuthal_order))

    @property
    def shape(self):
        return self.material_map.shape

    @property
    def cell_um(self) -> float:
        return self.cell_size * 1e-3

    @property
    def n_max(self) -> float:
        free = ~self.pec_mask
        return float(np.sqrt(self.material_map[free].max())) if free.any() else 1.0

    def node_index(self, r: float, z: float):
        """Nearest grid node ``(i, k)`` for a position in um; raises if outside."""
        nr, nz = self.shape
        i, k = r / self.cell_um, z / self.cell_um
        if not (0 <= i <= nr and 0 <= k <= nz):
            raise BuildError(f"position ({r}, {z}) um lies outside the domain")
        return int(round(i)), int(round(k))


def rasterize_layers(thicknesses, cell):
    """Cell counts per layer with error diffusion: boundaries snap to the nearest cell edge.

    The cumulative thickness is rounded rather than each layer, so the total
    error across the stack stays below half a cell.
    """
    edges = np.concatenate([[0.0], np.cumsum(thicknesses)]) / cell
    snapped = np.floor(edges + 0.5).astype(int)
    return np.diff(snapped)


def _real_indices(stack, wavelength):
    out = []
    for layer in stack.layers:
        n = complex(layer.index_at(wavelength))
        if abs(n.imag) > 0:
            raise InputDomainError("FDTD needs real layer indices; absorbing DBRs are not supported")
        out.append(n.real)
    return out


def build_domain(cavity: CavityGeometry, dbr: LayerStack | None, dimple: DimpleGeometry | None,
                 resolution: float, m: int, wavelength: float = 750.0,
                 radial_extent: float | None = None, substrate_thickness: float = 0.0,
                 fill_permittivity: float = 1.0) -> SimulationDomain:
    """Rasterize a plano-concave cavity.

    ``dimple=None`` selects a flat PEC top mirror at ``z = L`` (the infinite
    radius switch); ``dbr=None`` puts the cavity directly on the bottom PEC
    wall. The cell size is ``wavelength / (resolution * n_max)`` so that the
    densest medium carries ``resolution`` cells per wavelength. The sphere
    vertex lies a distance ``L`` above the DBR surface; outside the dimple rim
    the flat face of the mirror substrate is PEC as well.
    """
    if not resolution >= MIN_RESOLUTION:
        raise BuildError(f"resolution {resolution} is below the floor of {MIN_RESOLUTION} cells per wavelength")
    if not wavelength > 0:
        raise InputDomainError("wavelength must be > 0")
    if not fill_permittivity >= 1:
        raise InputDomainError("fill_permittivity must be >= 1")
    indices = _real_indices(dbr, wavelength) if dbr is not None else []
    sub_n = 1.0
    if dbr is not None and substrate_thickness > 0:
        sub_n = complex(dbr.substrate_index).real
    n_max = max([1.0, math.sqrt(fill_permittivity), sub_n] + indices)
    cell_nm = wavelength / (resolution * n_max)
    cell = cell_nm * 1e-3  # um

    L = cavity.length
    if dimple is not None:
        R = cavity.mirror_radius
        if abs(dimple.radius_of_curvature - R) > 1e-9 * R:
            raise BuildError("dimple radius_of_curvature must match the cavity mirror radius")
        if dimple.depth >= L:
            raise BuildError("dimple depth must be smaller than the cavity length")
        aperture = dimple.aperture_radius
        r_ext = aperture + 10 * cell if radial_extent is None else radial_extent
        if r_ext < aperture:
            raise BuildError("radial_extent does not cover the dimple aperture")
    else:
        if radial_extent is None:
            raise BuildError("a flat-mirror domain needs an explicit radial_extent")
        r_ext = radial_extent
        aperture = None

    thick = [layer.thickness * 1e-3 for layer in dbr.layers] if dbr is not None else []
    # substrate first (bottom), then the stack in reverse so layer 0 faces the cavity
    counts = rasterize_layers(([substrate_thickness] if substrate_thickness > 0 else []) + thick[::-1], cell)
    n_sub = int(counts[0]) if substrate_thickness > 0 else 0
    layer_counts = counts[1:] if substrate_thickness > 0 else counts
    dbr_top = int(np.sum(counts))
    k_vertex = dbr_top + int(round(L / cell))
    nz = k_vertex + 2
    # the outermost row is the PEC wall; its inner face sits at r_ext (nearest cell)
    nr = int(round(r_ext / cell)) + 1
    if nr < 4 or k_vertex - dbr_top < 4:
        raise BuildError("geometry does not fit the grid: fewer than 4 cells across")

    eps = np.full((nr, nz), float(fill_permittivity))
    eps[:, :n_sub] = sub_n**2
    layers_info = []
    top = dbr_top
    # layer 0 (cavity side) occupies the rows just below dbr_top
    for n, c in zip(indices, list(layer_counts)[::-1]):
        eps[:, top - c:top] = n * n
        layers_info.append((top - c, top, n))
        top -= c

    rc = (np.arange(nr) + 0.5) * cell
    zc = (np.arange(nz) + 0.5) * cell
    RC, ZC = np.meshgrid(rc, zc, indexing="ij")
    z_top = k_vertex * cell
    if dimple is None:
        pec = ZC >= z_top
    else:
        z_center = z_top - R
        z_face = z_top - dimple.depth
        outside = np.hypot(RC, ZC - z_center) >= R
        pec = (ZC >= z_face) & (outside | (RC >= aperture))
    pec[-1, :] = True
    pec[:, -1] = True
    eps[pec] = 1.0

    return SimulationDomain(
        radial_extent=(nr - 1) * cell,
        axial_extent=nz * cell,
        cell_size=cell_nm,
        azimuthal_order=m,
        material_map=eps,
        pec_mask=pec,
        resolution=float(resolution),
        design_wavelength=float(wavelength),
        dbr_top=dbr_top,
        dbr_layers=tuple(layers_info),
        metadata={
            "length": L,
            "mirror_radius": None if dimple is None else R,
            "aperture_radius": aperture,
            "vertex_row": k_vertex,
            "stack_thickness_error_cells": float(sum(layer_counts) - sum(thick) / cell),
        },
    )
