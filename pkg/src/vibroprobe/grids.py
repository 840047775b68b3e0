"""Signal containers and the delimited on-disk artifact format.

A SignalGrid is an n-dimensional array of signal values sampled on a
rectangular product of named 1-d axes.  Grids serialize to CSV in long
format: '#'-prefixed ``key = value`` metadata lines, a column-name row,
then one row per grid point with 17 significant digits so that float64
values round-trip exactly.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

_FMT = "%.17g"


@dataclass
class SignalGrid:
    """Signal values on a product of named axes.

    Attributes:
        axis_names: names of the axes, e.g. ("omega_cm1", "tau_fs").
        axes: matching tuple of strictly increasing 1-d float arrays.
        values: real or complex array of shape (len(axes[0]), ...).
        stderr: optional array of standard errors, same shape.
        meta: scalar metadata recorded in the CSV header.
    """

    axis_names: tuple
    axes: tuple
    values: np.ndarray
    stderr: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.axis_names = tuple(self.axis_names)
        self.axes = tuple(np.asarray(ax, dtype=float) for ax in self.axes)
        self.values = np.asarray(self.values)
        shape = tuple(len(ax) for ax in self.axes)
        if self.values.shape != shape:
            raise ValueError(
                f"values shape {self.values.shape} != axes shape {shape}")
        if self.stderr is not None:
            self.stderr = np.asarray(self.stderr, dtype=float)
            if self.stderr.shape != shape:
                raise ValueError("stderr shape mismatch")

    def axis(self, name):
        return self.axes[self.axis_names.index(name)]

    def to_csv(self, path):
        is_complex = np.iscomplexobj(self.values)
        cols = list(self.axis_names)
        cols += ["value_re", "value_im"] if is_complex else ["value"]
        if self.stderr is not None:
            cols.append("stderr")
        with open(path, "w", encoding="utf-8") as fh:
            for key in sorted(self.meta):
                fh.write(f"#{key} = {self.meta[key]}\n")
            fh.write(",".join(cols) + "\n")
            flat_v = self.values.ravel()
            flat_e = self.stderr.ravel() if self.stderr is not None else None
            for i, idx in enumerate(
                    itertools.product(*(range(len(ax)) for ax in self.axes))):
                row = [_FMT % self.axes[k][j] for k, j in enumerate(idx)]
                v = flat_v[i]
                if is_complex:
                    row += [_FMT % v.real, _FMT % v.imag]
                else:
                    row.append(_FMT % v)
                if flat_e is not None:
                    row.append(_FMT % flat_e[i])
                fh.write(",".join(row) + "\n")

    @classmethod
    def from_csv(cls, path):
        meta = {}
        with open(path, "r", encoding="utf-8") as fh:
            line = fh.readline()
            while line.startswith("#"):
                key, _, raw = line[1:].partition("=")
                meta[key.strip()] = _parse_meta(raw.strip())
                line = fh.readline()
            cols = line.rstrip("\n").split(",")
            body = np.loadtxt(fh, delimiter=",", ndmin=2)
        n_ax = len(cols) - cols.index(
            "value" if "value" in cols else "value_re")
        axis_names = tuple(cols[:len(cols) - n_ax])
        axes = tuple(np.unique(body[:, k]) for k in range(len(axis_names)))
        shape = tuple(len(ax) for ax in axes)
        k = len(axis_names)
        if "value" in cols:
            values = body[:, k].reshape(shape)
            k += 1
        else:
            values = (body[:, k] + 1j * body[:, k + 1]).reshape(shape)
            k += 2
        stderr = body[:, k].reshape(shape) if "stderr" in cols else None
        return cls(axis_names, axes, values, stderr, meta)


def _parse_meta(raw):
    for cast in (int, float):
        try:
            return cast(raw)
        except ValueError:
            pass
    return raw
