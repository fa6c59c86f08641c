"""Tracking and estimation metrics over run logs.

All integrals use the trapezoid rule on the log's uniform time grid.
Batch statistics use the sample standard deviation (N-1 denominator).
"""

from dataclasses import dataclass

import numpy as np

from .simengine import RunLog


def ise(t, values) -> float:
    """Integral square error: trapezoidal integral of the squared signal.

    `values` may be (N,) or (N, k); rows are summed over components, so
    a vector signal integrates its squared norm.
    """
    t = np.asarray(t, dtype=float)
    v = np.asarray(values, dtype=float)
    if t.ndim != 1 or t.shape[0] < 2:
        raise ValueError("need at least 2 samples")
    if v.shape[0] != t.shape[0]:
        raise ValueError("time and signal lengths differ")
    sq = v * v if v.ndim == 1 else np.sum(v * v, axis=1)
    return float(np.trapezoid(sq, t))


def max_error(log: RunLog) -> float:
    """Largest ||e_p|| over the run."""
    if log.t.shape[0] == 0:
        raise ValueError("empty log")
    return float(np.max(np.linalg.norm(log.e_p, axis=1)))


@dataclass
class RunMetrics:
    """Per-run measures: per-axis tracking ISE, force-estimation ISE,
    and the worst position-error norm."""

    ise_x: float
    ise_y: float
    ise_z: float
    ise_force: float
    max_err: float

    FIELDS = ("ise_x", "ise_y", "ise_z", "ise_force", "max_err")

    @classmethod
    def from_log(cls, log: RunLog) -> "RunMetrics":
        return cls(ise(log.t, log.e_p[:, 0]), ise(log.t, log.e_p[:, 1]),
                   ise(log.t, log.e_p[:, 2]), ise(log.t, log.f_d - log.f_hat),
                   max_error(log))

    def as_tuple(self):
        return (self.ise_x, self.ise_y, self.ise_z, self.ise_force, self.max_err)


@dataclass
class BatchMetrics:
    """Mean and sample std of each run metric over a batch, plus the
    worst max ||e_p|| seen in any run."""

    n_runs: int
    mean: RunMetrics
    std: RunMetrics
    worst_max_err: float


def batch_stats(runs) -> BatchMetrics:
    """Aggregate a list of RunMetrics (or RunLogs) into batch statistics."""
    metrics = [r if isinstance(r, RunMetrics) else RunMetrics.from_log(r)
               for r in runs]
    if len(metrics) < 2:
        raise ValueError("batch statistics need at least 2 runs")
    table = np.array([m.as_tuple() for m in metrics])
    mean = RunMetrics(*np.mean(table, axis=0))
    std = RunMetrics(*np.std(table, axis=0, ddof=1))
    return BatchMetrics(len(metrics), mean, std,
                        float(np.max(table[:, 4])))


_HEADER = ("estimator", "ISE_e1", "ISE_e2", "ISE_e3", "ISE_force", "max_err")


def comparison_table(rows: dict) -> str:
    """Plain-text table of RunMetrics keyed by estimator name."""
    lines = ["{:<10}{:>12}{:>12}{:>12}{:>12}{:>12}".format(*_HEADER)]
    for name, m in rows.items():
        lines.append("{:<10}".format(name)
                     + "".join(f"{x:>12.4g}" for x in m.as_tuple()))
    return "\n".join(lines) + "\n"


def comparison_csv(rows: dict) -> str:
    """Same table as CSV text."""
    lines = [",".join(_HEADER)]
    for name, m in rows.items():
        lines.append(name + "," + ",".join(f"{x:.9g}" for x in m.as_tuple()))
    return "\n".join(lines) + "\n"


def batch_table(rows: dict) -> str:
    """Plain-text table of BatchMetrics keyed by estimator name.

    Each metric is shown as mean (std); the final column is the worst
    max ||e_p|| over the batch.
    """
    header = ("estimator", "ISE_e1", "ISE_e2", "ISE_e3", "ISE_force",
              "max_err", "worst_max")
    lines = ["{:<10}{:>20}{:>20}{:>20}{:>20}{:>20}{:>12}".format(*header)]
    for name, b in rows.items():
        cells = [f"{m:.4g} ({s:.2g})" for m, s in
                 zip(b.mean.as_tuple(), b.std.as_tuple())]
        lines.append("{:<10}".format(name) + "".join(f"{c:>20}" for c in cells)
                     + f"{b.worst_max_err:>12.4g}")
    return "\n".join(lines) + "\n"


def batch_csv(rows: dict) -> str:
    """BatchMetrics as CSV text with mean/std column pairs."""
    cols = ["estimator"]
    for f in RunMetrics.FIELDS:
        cols += [f"mean_{f}", f"std_{f}"]
    cols.append("worst_max_err")
    lines = [",".join(cols)]
    for name, b in rows.items():
        cells = []
        for m, s in zip(b.mean.as_tuple(), b.std.as_tuple()):
            cells += [f"{m:.9g}", f"{s:.9g}"]
        cells.append(f"{b.worst_max_err:.9g}")
        lines.append(name + "," + ",".join(cells))
    return "\n".join(lines) + "\n"
