"""Figure rendering from vibroprobe CSV artifacts.

``render_heatmap`` draws one (omega, tau) intensity map;
``render_panels`` draws a grid of Delta profiles with one or more
traces per panel.  All numeric helpers re-derive from the parsed CSV
content, never from rendered pixels.
"""

from __future__ import annotations

import logging

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from scipy.ndimage import gaussian_filter1d
from scipy.signal import find_peaks

from .csvio import SchemaError, Table, read_table

log = logging.getLogger(__name__)

_LABELS = {"omega_cm1": r"$\omega$ (cm$^{-1}$)",
           "delta_cm1": r"$\Delta$ (cm$^{-1}$)",
           "tau_fs": r"$\tau$ (fs)"}


def axis_label(name: str) -> str:
    return _LABELS.get(name, name)


# ---------------------------------------------------------------------------
# numeric helpers (CSV-derived, used by the figure tests)

def column_argmax_trace(table: Table, along="omega_cm1", over="tau_fs"):
    """Position of the intensity maximum along one axis vs the other.

    Returns ``(over_axis, argmax_positions)`` with the intensity
    maximised over ``along`` for each point of ``over``.
    """
    inten = table.intensity()
    if table.axis_names.index(along) != 0:
        inten = inten.T
    return table.axis(over), table.axis(along)[np.argmax(inten, axis=0)]


def profile_peaks(table: Table, smooth_width, prominence_frac=0.1):
    """Peak count and positions of a smoothed 1D amplitude profile."""
    if table.ndim != 1:
        raise SchemaError(f"{table.path}: expected a 1D profile")
    x = table.axes[0]
    step = x[1] - x[0]
    smoothed = gaussian_filter1d(np.abs(table.values),
                                 max(smooth_width / step, 1e-9))
    peaks, _ = find_peaks(smoothed,
                          prominence=prominence_frac * smoothed.max())
    return len(peaks), x[peaks]


# ---------------------------------------------------------------------------
# rendering

def _save(fig, output):
    fig.savefig(output, metadata={"Date": None})
    plt.close(fig)
    return str(output)


def render_heatmap(spec) -> str:
    """Render one 2D artifact as an intensity heatmap.

    Spec keys: ``input`` (CSV path), ``output`` (image path), optional
    ``title``, ``cmap`` (default viridis) and ``transpose`` (swap the
    plotted axes).
    """
    table = read_table(spec["input"])
    if table.ndim != 2:
        raise SchemaError(f"{table.path}: heatmap needs a 2D grid, got "
                          f"axes {table.axis_names}")
    x_name, y_name = table.axis_names[1], table.axis_names[0]
    z = table.intensity()
    if spec.get("transpose", False):
        x_name, y_name = y_name, x_name
        z = z.T
    fig, ax = plt.subplots(figsize=(5.2, 3.8), constrained_layout=True)
    pm = ax.pcolormesh(table.axis(x_name), table.axis(y_name), z,
                       shading="auto", cmap=spec.get("cmap", "viridis"))
    fig.colorbar(pm, ax=ax, label=r"$|S|^2$")
    ax.set_xlabel(axis_label(x_name))
    ax.set_ylabel(axis_label(y_name))
    if spec.get("title"):
        ax.set_title(spec["title"])
    return _save(fig, spec["output"])


def _panel_traces(tables):
    """Common Delta grid and intensity traces, resampling if needed."""
    ref = tables[0].axes[0]
    traces = [tables[0].intensity()]
    for table in tables[1:]:
        x = table.axes[0]
        if len(x) != len(ref) or not np.array_equal(x, ref):
            log.warning("%s: Delta grid differs from %s, resampling",
                        table.path, tables[0].path)
            traces.append(np.interp(ref, x, table.intensity(),
                                    left=0.0, right=0.0))
        else:
            traces.append(table.intensity())
    return ref, traces


def _trace_label(table: Table) -> str:
    parts = []
    if "sigma_m_fs" in table.meta:
        parts.append(rf"$\sigma_m={table.meta['sigma_m_fs']:g}$ fs")
    if "sigma_pr_fs" in table.meta:
        parts.append(rf"$\sigma_{{pr}}={table.meta['sigma_pr_fs']:g}$ fs")
    return ", ".join(parts)


def render_panels(spec) -> str:
    """Render a grid of 1D Delta-profile panels.

    Spec keys: ``panels`` (list of dicts with ``inputs`` = CSV paths
    and optional ``title``), ``output``, optional ``ncols``.  Traces
    within a panel share the Delta grid of the first input; differing
    grids are linearly resampled with a logged warning.
    """
    panels = spec["panels"]
    if not panels:
        raise SchemaError("panel spec lists no panels")
    ncols = int(spec.get("ncols", min(2, len(panels))))
    nrows = -(-len(panels) // ncols)
    fig, axes = plt.subplots(nrows, ncols, squeeze=False,
                             figsize=(4.2 * ncols, 2.9 * nrows),
                             constrained_layout=True)
    flat = axes.ravel()
    for ax in flat[len(panels):]:
        ax.set_axis_off()
    for ax, panel in zip(flat, panels):
        tables = [read_table(p) for p in panel["inputs"]]
        for table in tables:
            if table.ndim != 1:
                raise SchemaError(f"{table.path}: panel trace must be a "
                                  f"1D profile, got axes "
                                  f"{table.axis_names}")
        x, traces = _panel_traces(tables)
        for table, trace in zip(tables, traces):
            ax.plot(x, trace / max(trace.max(), 1e-300),
                    label=_trace_label(table))
        ax.set_xlabel(axis_label(tables[0].axis_names[0]))
        ax.set_ylabel(r"$|S|^2$ (norm.)")
        if panel.get("title"):
            ax.set_title(panel["title"])
        if len(tables) > 1:
            ax.legend(fontsize=8)
    return _save(fig, spec["output"])
