"""Run-log CSV access.

The simulator writes one row per control instant with the fixed header
below.  Loading is read-only; a figure that references a column missing
from the file fails with a diagnostic naming the columns.
"""

import csv
import warnings
from pathlib import Path

import numpy as np

CSV_COLUMNS = (
    "t", "px", "py", "pz", "rx", "ry", "rz", "ex", "ey", "ez",
    "dx_cable", "dy_cable", "dz_cable", "nu_x", "nu_y", "nu_z", "T",
    "K_hat", "d_hat", "Fhat_x", "Fhat_y", "Fhat_z",
    "Fd_x", "Fd_y", "Fd_z", "released",
)


class PlotError(Exception):
    """Unreadable input, unknown figure kind, or missing CSV columns."""


class RunData:
    """Columns of one run CSV, keyed by header name."""

    def __init__(self, path, data: dict):
        self.path = Path(path)
        self.data = data
        self.label = self.path.stem

    def __len__(self):
        return self.data["t"].shape[0]

    def cols(self, *names) -> list:
        """Fetch columns by name; missing ones raise a named diagnostic."""
        missing = [n for n in names if n not in self.data]
        if missing:
            raise PlotError(f"{self.path}: CSV is missing columns: "
                            + ", ".join(missing))
        return [self.data[n] for n in names]

    def stack(self, *names) -> np.ndarray:
        """Columns side by side as an (N, k) array."""
        return np.column_stack(self.cols(*names))

    def truncated(self, n: int) -> "RunData":
        out = RunData(self.path, {k: v[:n] for k, v in self.data.items()})
        out.label = self.label
        return out


def load_run(path) -> RunData:
    """Read one run CSV into named float columns."""
    path = Path(path)
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise PlotError(f"cannot read {path}: {exc}") from exc
    if len(rows) < 2:
        raise PlotError(f"{path}: no data rows")
    header = rows[0]
    if "t" not in header:
        raise PlotError(f"{path}: CSV is missing columns: t")
    try:
        table = np.array(rows[1:], dtype=float)
    except ValueError as exc:
        raise PlotError(f"{path}: non-numeric data: {exc}") from exc
    if table.shape[1] != len(header):
        raise PlotError(f"{path}: ragged rows do not match the header")
    return RunData(path, {name: table[:, i] for i, name in enumerate(header)})


def load_runs(paths) -> list:
    """Load several runs on a common time base.

    Files with more samples than the shortest run are truncated to it,
    with a warning; per-sample statistics are then well defined.
    """
    runs = [load_run(p) for p in paths]
    shortest = min(len(r) for r in runs)
    if any(len(r) != shortest for r in runs):
        longest = max(len(r) for r in runs)
        warnings.warn(f"run lengths differ ({shortest}..{longest} samples); "
                      f"truncating all to {shortest}", stacklevel=2)
        runs = [r.truncated(shortest) for r in runs]
    return runs
