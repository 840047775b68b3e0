"""Reader for the vibroprobe CSV artifact schema.

A file consists of ``#key = value`` comment headers, one column-name
row, and comma-separated data rows in row-major axis-product order.
Axis columns come first (``omega_cm1``, ``delta_cm1``, ``tau_fs``),
followed by ``value`` or ``value_re``/``value_im`` and an optional
``stderr`` column.
"""

from __future__ import annotations

import ast
from dataclasses import dataclass, field

import numpy as np

AXIS_COLUMNS = ("omega_cm1", "delta_cm1", "tau_fs")
VALUE_COLUMNS = ("value", "value_re", "value_im", "stderr")


class SchemaError(ValueError):
    """The file does not match the documented CSV schema."""


@dataclass
class Table:
    """One parsed CSV artifact."""

    meta: dict
    axis_names: tuple
    axes: tuple
    values: np.ndarray
    stderr: np.ndarray | None = None
    path: str = field(default="", compare=False)

    @property
    def ndim(self) -> int:
        return len(self.axis_names)

    def axis(self, name):
        return self.axes[self.axis_names.index(name)]

    def intensity(self) -> np.ndarray:
        return np.abs(self.values) ** 2


def _parse_meta_value(raw):
    try:
        return ast.literal_eval(raw)
    except (ValueError, SyntaxError):
        return raw


def read_table(path) -> Table:
    """Parse one artifact, validating columns against the schema."""
    meta = {}
    with open(path, "r", encoding="utf-8") as fh:
        line = fh.readline()
        while line.startswith("#"):
            key, sep, raw = line[1:].partition("=")
            if not sep:
                raise SchemaError(f"{path}: malformed header line {line!r}")
            meta[key.strip()] = _parse_meta_value(raw.strip())
            line = fh.readline()
        cols = line.rstrip("\n").split(",")
        for col in cols:
            if col not in AXIS_COLUMNS + VALUE_COLUMNS:
                raise SchemaError(f"{path}: unexpected column {col!r}")
        n_axes = sum(c in AXIS_COLUMNS for c in cols)
        if n_axes == 0:
            raise SchemaError(f"{path}: no axis column found")
        if cols[:n_axes] != [c for c in cols if c in AXIS_COLUMNS]:
            raise SchemaError(f"{path}: axis columns must come first")
        if "value" in cols and "value_re" in cols:
            raise SchemaError(f"{path}: column 'value' conflicts with "
                              "'value_re'")
        if ("value_re" in cols) != ("value_im" in cols):
            missing = "value_im" if "value_re" in cols else "value_re"
            raise SchemaError(f"{path}: missing column {missing!r}")
        if "value" not in cols and "value_re" not in cols:
            raise SchemaError(f"{path}: missing column 'value'")
        body = np.loadtxt(fh, delimiter=",", ndmin=2)
    if body.shape[1] != len(cols):
        raise SchemaError(f"{path}: row width {body.shape[1]} does not "
                          f"match {len(cols)} columns")

    axis_names = tuple(cols[:n_axes])
    axes = tuple(np.unique(body[:, k]) for k in range(n_axes))
    shape = tuple(len(ax) for ax in axes)
    if int(np.prod(shape)) != body.shape[0]:
        raise SchemaError(f"{path}: {body.shape[0]} rows do not fill the "
                          f"{shape} axis product")
    k = n_axes
    if "value" in cols:
        values = body[:, k].reshape(shape)
        k += 1
    else:
        values = (body[:, k] + 1j * body[:, k + 1]).reshape(shape)
        k += 2
    stderr = body[:, k].reshape(shape) if "stderr" in cols else None
    return Table(meta, axis_names, axes, values, stderr, str(path))
