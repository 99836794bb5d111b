"""Files written and read by the cavity solver.

* Field and energy maps: binary grid files (see :mod:`hemicav.gridio`) with
  the cell size in nm and the component name in the header, or CSV with the
  radial coordinate (um) down the first column and the axial one along the
  first row.
* Probe records: CSV with a ``#``-prefixed JSON header line carrying the
  probe list, time step (fs), source switch-off step and Courant factor.
* Resonance lists: JSON, ``Q = inf`` written as ``null``.
"""

from __future__ import annotations

import io
import json
import math
from pathlib import Path

import numpy as np

from .. import gridio
from ..errors import InputDomainError
from .domain import SimulationDomain
from .solver import ModeProfile, ProbeRecord

__all__ = [
    "write_map",
    "read_map",
    "write_map_csv",
    "write_record",
    "read_record",
    "write_resonances",
    "read_resonances",
    "write_profile",
]


def write_map(path, domain: SimulationDomain, data, component: str) -> None:
    """Binary dump of a per-cell ``(Nr, Nz)`` map; rows run along r, columns along z."""
    gridio.write_grid(path, data, domain.cell_size, component, "nm",
                      axes=["r", "z"], azimuthal_order=domain.azimuthal_order)


def read_map(path):
    """``(header, array)`` of a map written by :func:`write_map`."""
    return gridio.read_grid(path)


def write_map_csv(path, domain: SimulationDomain, data) -> None:
    """CSV export of a per-cell map with cell-centre coordinates in um."""
    nr, nz = np.shape(data)
    cell = domain.cell_um
    gridio.write_grid_csv(path, data, (np.arange(nr) + 0.5) * cell, (np.arange(nz) + 0.5) * cell)


def write_record(path, record: ProbeRecord) -> None:
    header = {
        "probes": [list(p) for p in record.probes],
        "time_step_fs": record.time_step,
        "source_end": record.source_end,
        "courant_factor": record.courant_factor,
    }
    names = ["t_fs"] + [f"{c}@r={r:g}um,z={z:g}um" for c, r, z in record.probes]
    data = np.column_stack([record.times, record.series])
    with open(path, "w") as fh:
        fh.write("# " + json.dumps(header, sort_keys=True) + "\n")
        fh.write(",".join(names) + "\n")
        np.savetxt(fh, data, delimiter=",", fmt="%.17g")


def read_record(path) -> ProbeRecord:
    text = Path(path).read_text()
    first, _, rest = text.partition("\n")
    if not first.startswith("# "):
        raise InputDomainError(f"{path}: missing probe-record header line")
    try:
        header = json.loads(first[2:])
        data = np.loadtxt(io.StringIO(rest), delimiter=",", skiprows=1, ndmin=2)
        probes = tuple((str(c), float(r), float(z)) for c, r, z in header["probes"])
        return ProbeRecord(probes, float(header["time_step_fs"]), data[:, 1:],
                           int(header["source_end"]), float(header["courant_factor"]))
    except (KeyError, ValueError, TypeError) as exc:
        raise InputDomainError(f"{path}: malformed probe record ({exc})") from exc


def _finite_or_none(x):
    return float(x) if math.isfinite(x) else None


def write_resonances(path, found, **meta) -> None:
    doc = {
        "resonances": [{"frequency_THz": float(f), "quality_factor": _finite_or_none(q)} for f, q in found],
        **meta,
    }
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def read_resonances(path):
    doc = json.loads(Path(path).read_text())
    return [(r["frequency_THz"], math.inf if r["quality_factor"] is None else r["quality_factor"])
            for r in doc["resonances"]]


def write_profile(directory, domain: SimulationDomain, profile: ModeProfile, stem: str = "mode") -> dict:
    """Energy map (grid and CSV), transverse profile CSV and a JSON summary; returns the paths."""
    d = Path(directory)
    paths = {
        "energy_grid": d / f"{stem}_energy.grid",
        "energy_csv": d / f"{stem}_energy.csv",
        "transverse_csv": d / f"{stem}_transverse.csv",
        "summary": d / f"{stem}.json",
    }
    write_map(paths["energy_grid"], domain, profile.energy_density_map, "u")
    write_map_csv(paths["energy_csv"], domain, profile.energy_density_map)
    r, amp = profile.transverse_profile
    np.savetxt(paths["transverse_csv"], np.column_stack([r, amp]), delimiter=",",
               header="r_um,amplitude", comments="", fmt="%.17g")
    paths["summary"].write_text(json.dumps(profile.to_dict(), indent=2, sort_keys=True) + "\n")
    return {k: str(v) for k, v in paths.items()}
