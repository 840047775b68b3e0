"""Figure rendering for vibroprobe CSV artifacts."""

from .csvio import SchemaError, Table, read_table
from .render import (column_argmax_trace, profile_peaks, render_heatmap,
                     render_panels)

__all__ = ["SchemaError", "Table", "read_table", "column_argmax_trace",
           "profile_peaks", "render_heatmap", "render_panels"]

__version__ = "0.1.0"
