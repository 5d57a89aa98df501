"""Post-processing figures for migcon run directories.

Reads the documented run-directory files (config.echo, series.csv,
snapshots/*.fld, meta.txt, harness report CSVs) with its own parsers and
emits static PNG/SVG figures.  Never imports the simulator and never
writes inside a run directory.
"""

from .runview import RunView, UsageError, read_fld, read_report
from .figures import plot_convergence, plot_fields, plot_series

__version__ = "0.1.0"

__all__ = [
    "RunView", "UsageError", "read_fld", "read_report",
    "plot_series", "plot_fields", "plot_convergence",
]
