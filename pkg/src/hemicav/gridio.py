"""Binary grid files shared by the FDTD dumps and the metrology loaders.

Layout::

    b"HCGRID01"                      magic, 8 bytes
    uint32 little-endian             length of the JSON header in bytes
    JSON header (utf-8)              {"shape": [ny, nx], "dtype": "<f8",
                                      "cell_size": ..., "cell_unit": "nm",
                                      "component": "u", ...}
    raw array data, C order, dtype as declared
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .errors import InputDomainError

MAGIC = b"HCGRID01"


def write_grid(path, data, cell_size: float, component: str, cell_unit: str = "nm", **extra) -> None:
    arr = np.ascontiguousarray(data, dtype="<f8")
    header = {
        "shape": list(arr.shape),
        "dtype": "<f8",
        "cell_size": float(cell_size),
        "cell_unit": cell_unit,
        "component": component,
        **extra,
    }
    blob = json.dumps(header, sort_keys=True).encode()
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        fh.write(arr.tobytes())


def read_grid(path):
    """Return ``(header, array)``."""
    raw = Path(path).read_bytes()
    if raw[:8] != MAGIC:
        raise InputDomainError(f"{path}: not a grid file")
    try:
        (n,) = struct.unpack("<I", raw[8:12])
        header = json.loads(raw[12:12 + n].decode())
        data = np.frombuffer(raw[12 + n:], dtype=header["dtype"]).reshape(header["shape"]).copy()
    except (struct.error, ValueError, KeyError, TypeError) as exc:
        raise InputDomainError(f"{path}: corrupt grid file ({exc})") from exc
    return header, data


def write_grid_csv(path, data, row_coords=None, col_coords=None) -> None:
    """Plain CSV export; optional first row/column carry coordinates."""
    arr = np.asarray(data, dtype=float)
    if row_coords is None and col_coords is None:
        np.savetxt(path, arr, delimiter=",")
        return
    rows = np.asarray(row_coords if row_coords is not None else np.arange(arr.shape[0]), dtype=float)
    cols = np.asarray(col_coords if col_coords is not None else np.arange(arr.shape[1]), dtype=float)
    out = np.empty((arr.shape[0] + 1, arr.shape[1] + 1))
    out[0, 0] = np.nan
    out[0, 1:] = cols
    out[1:, 0] = rows
    out[1:, 1:] = arr
    np.savetxt(path, out, delimiter=",")
