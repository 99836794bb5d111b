"""Run configuration files: loading, unit-carrying quantities and schema diagnostics.

Configs are JSON or YAML mappings. Every dimensioned field is written as a
string ``"<number> <unit>"`` (``"10 um"``, ``"49 ueV"``) or a mapping
``{value: 10, unit: um}``; a bare number in such a field is a schema error.
Dimensionless fields (reflectances, counts, exponents) are plain numbers.
"""

from __future__ import annotations

import json
import math
import re
from decimal import Decimal
from pathlib import Path

import yaml

from .errors import HemicavError

__all__ = ["SchemaError", "UNITS", "load_config", "apply_override", "Section"]

# factor to the SI (or base) unit of each dimension
UNITS = {
    "length": {"m": 1.0, "mm": 1e-3, "um": 1e-6, "µm": 1e-6, "nm": 1e-9, "pm": 1e-12},
    "frequency": {"Hz": 1.0, "kHz": 1e3, "MHz": 1e6, "GHz": 1e9, "THz": 1e12},
    "energy": {"eV": 1.0, "meV": 1e-3, "ueV": 1e-6, "µeV": 1e-6},
    "angle": {"rad": 1.0, "deg": math.pi / 180},
    "time": {"s": 1.0, "ms": 1e-3, "us": 1e-6, "ns": 1e-9, "ps": 1e-12, "fs": 1e-15},
    "volume": {"m^3": 1.0, "um^3": 1e-18, "µm^3": 1e-18, "nm^3": 1e-27},
    "dipole": {"D": 1.0, "debye": 1.0},
    "spatial_frequency": {"1/m": 1.0, "1/mm": 1e3, "1/um": 1e6},
}
_DIMENSION_OF_UNIT = {u: dim for dim, table in UNITS.items() for u in table}
_QUANTITY = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)(?:\s+|(?=[^\s\d.]))(\S+)\s*$")


def _plain_number(raw):
    """Float from a number or a numeric string (YAML reads ``1e-4`` as a string), else ``None``."""
    if isinstance(raw, bool):
        return None
    if isinstance(raw, (int, float)):
        return raw
    if isinstance(raw, str):
        try:
            return float(raw)
        except ValueError:
            return None
    return None


class SchemaError(HemicavError):
    """Config does not match the schema; carries the field path and source line when known."""

    def __init__(self, message, path: str = "", line: int | None = None):
        where = path or "<root>"
        if line is not None:
            where = f"line {line}: {where}"
        super().__init__(f"{where}: {message}")
        self.path = path
        self.line = line


def _line_map(text):
    """Dotted field path -> 1-based line number, from the YAML node tree (JSON is valid YAML)."""
    lines = {}
    try:
        root = yaml.compose(text)
    except yaml.YAMLError:
        return lines

    def walk(node, prefix):
        if isinstance(node, yaml.MappingNode):
            for key, value in node.value:
                path = f"{prefix}.{key.value}" if prefix else str(key.value)
                lines[path] = key.start_mark.line + 1
                walk(value, path)
        elif isinstance(node, yaml.SequenceNode):
            for i, item in enumerate(node.value):
                path = f"{prefix}[{i}]"
                lines[path] = item.start_mark.line + 1
                walk(item, path)

    if root is not None:
        walk(root, "")
    return lines


def load_config(path):
    """``(mapping, line_map)`` from a ``.json``, ``.yaml`` or ``.yml`` file."""
    path = Path(path)
    text = path.read_text()
    suffix = path.suffix.lower()
    try:
        if suffix == ".json":
            data = json.loads(text)
        elif suffix in (".yaml", ".yml"):
            data = yaml.safe_load(text)
        else:
            raise SchemaError(f"unsupported config format {suffix!r} (use .json, .yaml or .yml)")
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc.msg}", line=exc.lineno) from exc
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise SchemaError(f"invalid YAML: {getattr(exc, 'problem', exc)}",
                          line=None if mark is None else mark.line + 1) from exc
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise SchemaError("config must be a mapping at the top level")
    return data, _line_map(text)


def apply_override(data: dict, assignment: str) -> None:
    """Apply ``a.b.c=value`` in place; the value is parsed as a YAML scalar or list."""
    key, sep, raw = assignment.partition("=")
    if not sep or not key.strip():
        raise SchemaError(f"override {assignment!r} is not of the form key=value")
    parts = key.strip().split(".")
    node = data
    for p in parts[:-1]:
        child = node.get(p)
        if child is None:
            child = node[p] = {}
        if not isinstance(child, dict):
            raise SchemaError("cannot descend into a non-mapping field", ".".join(parts))
        node = child
    try:
        node[parts[-1]] = yaml.safe_load(raw) if raw.strip() else ""
    except yaml.YAMLError as exc:
        raise SchemaError(f"override value is not valid YAML: {exc}", key) from exc


class Section:
    """Typed, path-aware reader over one mapping of the config.

    Every accessor records the key as consumed; :meth:`finish` rejects keys
    that no accessor asked for, so misspelled fields are caught.
    """

    def __init__(self, data, path: str = "", lines: dict | None = None):
        if not isinstance(data, dict):
            raise SchemaError("expected a mapping", path, (lines or {}).get(path))
        self.data = data
        self.path = path
        self.lines = lines or {}
        self._used = set()

    def _p(self, key):
        return f"{self.path}.{key}" if self.path else key

    def error(self, key, message):
        return SchemaError(message, self._p(key), self.lines.get(self._p(key), self.lines.get(self.path)))

    def has(self, key) -> bool:
        return key in self.data

    def _get(self, key, required, default):
        self._used.add(key)
        if key not in self.data or self.data[key] is None:
            if required:
                raise self.error(key, "required field is missing")
            return default, False
        return self.data[key], True

    def quantity(self, key, unit: str, required: bool = True, default=None, positive: bool = False):
        """Value converted to ``unit``; the input must name a unit of the same dimension."""
        raw, present = self._get(key, required, default)
        if not present:
            return raw
        value = self._to_unit(key, raw, unit)
        if positive and not value > 0:
            raise self.error(key, "must be > 0")
        return value

    def _to_unit(self, key, raw, unit):
        dim = _DIMENSION_OF_UNIT[unit]
        if _plain_number(raw) is not None:
            raise self.error(key, f"missing unit (write e.g. \"{raw} {unit}\")")
        if isinstance(raw, dict):
            if set(raw) != {"value", "unit"}:
                raise self.error(key, "quantity mappings need exactly 'value' and 'unit'")
            number, given = raw["value"], raw["unit"]
            if isinstance(number, bool) or not isinstance(number, (int, float)):
                raise self.error(key, "quantity value must be a number")
        elif isinstance(raw, str):
            m = _QUANTITY.match(raw)
            if not m:
                raise self.error(key, f"cannot parse quantity {raw!r} (expected '<number> <unit>')")
            number, given = float(m.group(1)), m.group(2)
        else:
            raise self.error(key, "expected a quantity such as '10 um'")
        if given not in _DIMENSION_OF_UNIT:
            raise self.error(key, f"unknown unit {given!r}")
        if _DIMENSION_OF_UNIT[given] != dim:
            raise self.error(key, f"unit {given!r} is not a {dim} unit")
        # decimal ratio keeps e.g. 10 um -> 10000 nm exact
        factor = float(Decimal(repr(UNITS[dim][given])) / Decimal(repr(UNITS[dim][unit])))
        value = float(number) * factor
        if not math.isfinite(value):
            raise self.error(key, "must be finite")
        return value

    def quantity_list(self, key, unit: str, required: bool = True, default=None, length: int | None = None):
        raw, present = self._get(key, required, default)
        if not present:
            return raw
        if not isinstance(raw, list):
            raise self.error(key, "expected a list of quantities")
        if length is not None and len(raw) != length:
            raise self.error(key, f"expected exactly {length} entries")
        return [self._to_unit(f"{key}[{i}]", v, unit) for i, v in enumerate(raw)]

    def number(self, key, required: bool = True, default=None, low=None, high=None, integer: bool = False):
        """Dimensionless number; a string with a unit here is an error too."""
        raw, present = self._get(key, required, default)
        if not present:
            return raw
        raw = _plain_number(raw)
        if raw is None:
            raise self.error(key, "expected a plain (dimensionless) number")
        if integer and (not float(raw).is_integer()):
            raise self.error(key, "expected an integer")
        value = int(raw) if integer else float(raw)
        if not math.isfinite(value):
            raise self.error(key, "must be finite")
        if low is not None and value < low:
            raise self.error(key, f"must be >= {low}")
        if high is not None and value > high:
            raise self.error(key, f"must be <= {high}")
        return value

    def numbers(self, key, required: bool = True, default=None):
        raw, present = self._get(key, required, default)
        if not present:
            return raw
        values = [_plain_number(v) for v in raw] if isinstance(raw, list) else [None]
        if any(v is None for v in values):
            raise self.error(key, "expected a list of plain numbers")
        return [float(v) for v in values]

    def string(self, key, required: bool = True, default=None, choices=None):
        raw, present = self._get(key, required, default)
        if not present:
            return raw
        if not isinstance(raw, str):
            raise self.error(key, "expected a string")
        if choices is not None and raw not in choices:
            raise self.error(key, f"must be one of {sorted(choices)}")
        return raw

    def flag(self, key, default: bool = False):
        raw, present = self._get(key, False, default)
        if not present:
            return raw
        if not isinstance(raw, bool):
            raise self.error(key, "expected true or false")
        return raw

    def section(self, key, required: bool = True):
        raw, present = self._get(key, required, None)
        if not present:
            return None
        if not isinstance(raw, dict):
            raise self.error(key, "expected a mapping")
        return Section(raw, self._p(key), self.lines)

    def sections(self, key, required: bool = True):
        raw, present = self._get(key, required, None)
        if not present:
            return []
        if not isinstance(raw, list):
            raise self.error(key, "expected a list")
        out = []
        for i, item in enumerate(raw):
            if not isinstance(item, dict):
                raise self.error(f"{key}[{i}]", "expected a mapping")
            out.append(Section(item, self._p(f"{key}[{i}]"), self.lines))
        return out

    def choose(self, *keys):
        """Exactly one of ``keys`` must be present; returns it."""
        present = [k for k in keys if k in self.data]
        if len(present) != 1:
            raise SchemaError(f"give exactly one of {list(keys)}", self.path, self.lines.get(self.path))
        return present[0]

    def finish(self):
        extra = sorted(set(self.data) - self._used)
        if extra:
            raise self.error(extra[0], "unknown field")
