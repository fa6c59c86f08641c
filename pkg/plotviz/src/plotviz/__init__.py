"""Figure generation for tethered-quadrotor run logs.

Reads the run CSVs written by the simulation suite (fixed header, one
row per control instant) and renders four figure kinds: per-axis
tracking-error time histories, an isometric 3-D flight path, estimation
traces, and batch overlays with a per-sample mean line and the
worst run highlighted.  The CSV schema is the only coupling to the
simulator; nothing here imports it.
"""

from .figures import FigureSpec, KINDS, batch_curves, render
from .runcsv import CSV_COLUMNS, PlotError, RunData, load_run, load_runs

__version__ = "0.1.0"
