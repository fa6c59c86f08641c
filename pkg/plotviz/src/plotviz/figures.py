"""Figure construction for the four supported kinds.

`make_figure` builds a matplotlib Figure from a FigureSpec without
touching the filesystem beyond reading the CSVs; `render` additionally
writes the image.  Batch statistics live in `batch_curves` so the
mean/worst selection is testable without drawing anything.
"""

from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402
from pathlib import Path  # noqa: E402

from .runcsv import PlotError, load_runs  # noqa: E402

KINDS = ("timeseries", "iso3d", "estimation", "batch-overlay")

_AXIS_LABELS = ("$e_x$ [m]", "$e_y$ [m]", "$e_z$ [m]")


@dataclass
class FigureSpec:
    """One figure request: kind, input CSVs, output path, styling."""

    kind: str
    inputs: tuple
    out: Path
    mean_emphasis: bool = True
    worst_highlight: bool = True

    def __post_init__(self):
        self.inputs = tuple(Path(p) for p in self.inputs)
        self.out = Path(self.out)
        if self.kind not in KINDS:
            raise PlotError(f"unknown figure kind {self.kind!r}; "
                            f"expected one of {', '.join(KINDS)}")
        if not self.inputs:
            raise PlotError("no input CSVs given")
        if self.kind == "batch-overlay" and len(self.inputs) < 2:
            raise PlotError("batch-overlay needs at least 2 runs")


def batch_curves(runs):
    """Per-sample mean error curve and the index of the worst run.

    Returns (t, mean, worst): mean is the arithmetic per-sample mean of
    the per-axis tracking errors over runs, shape (N, 3); worst is the
    index of the run with the largest max ||e_p||.
    """
    errs = np.stack([r.stack("ex", "ey", "ez") for r in runs])
    peaks = np.linalg.norm(errs, axis=2).max(axis=1)
    return runs[0].cols("t")[0], errs.mean(axis=0), int(np.argmax(peaks))


def _timeseries(runs, spec) -> plt.Figure:
    fig, axes = plt.subplots(3, 1, sharex=True, figsize=(7.0, 7.5))
    for run in runs:
        t = run.cols("t")[0]
        err = run.stack("ex", "ey", "ez")
        for i, ax in enumerate(axes):
            ax.plot(t, err[:, i], label=run.label, linewidth=1.2)
    for i, ax in enumerate(axes):
        ax.set_ylabel(_AXIS_LABELS[i])
        ax.grid(True, alpha=0.3)
    axes[-1].set_xlabel("t [s]")
    axes[0].legend(loc="upper right", fontsize=8)
    return fig


def _iso3d(runs, spec) -> plt.Figure:
    fig = plt.figure(figsize=(6.5, 6.0))
    ax = fig.add_subplot(projection="3d")
    for run in runs:
        px, py, pz = run.cols("px", "py", "pz")
        ax.plot(px, py, -pz, linewidth=1.2, label=run.label)
    rx, ry, rz = runs[0].cols("rx", "ry", "rz")
    ax.plot(rx, ry, -rz, "k--", linewidth=1.0, label="reference")
    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")
    ax.set_zlabel("altitude [m]")
    ax.legend(loc="upper right", fontsize=8)
    return fig


def _estimation(runs, spec) -> plt.Figure:
    fig, (ax_f, ax_kd) = plt.subplots(2, 1, sharex=True, figsize=(7.0, 6.0))
    for run in runs:
        t = run.cols("t")[0]
        f_err = np.linalg.norm(
            run.stack("Fd_x", "Fd_y", "Fd_z")
            - run.stack("Fhat_x", "Fhat_y", "Fhat_z"), axis=1)
        ax_f.plot(t, f_err, label=run.label, linewidth=1.2)
        k_hat, d_hat = run.cols("K_hat", "d_hat")
        if not np.isnan(k_hat).all():
            ax_kd.plot(t, k_hat, label=f"{run.label} $\\hat{{K}}$",
                       linewidth=1.2)
            ax_kd.plot(t, d_hat, "--", label=f"{run.label} $\\hat{{d}}$",
                       linewidth=1.2)
    ax_f.set_ylabel(r"$\|F_d-\hat{F}_d\|$ [N]")
    ax_f.legend(loc="upper right", fontsize=8)
    ax_kd.set_ylabel(r"$\hat{K}$ [N/m], $\hat{d}$ [N]")
    ax_kd.set_xlabel("t [s]")
    if ax_kd.lines:
        ax_kd.legend(loc="upper right", fontsize=8)
    for ax in (ax_f, ax_kd):
        ax.grid(True, alpha=0.3)
    return fig


def _batch_overlay(runs, spec) -> plt.Figure:
    t, mean, worst = batch_curves(runs)
    fig, axes = plt.subplots(3, 1, sharex=True, figsize=(7.0, 7.5))
    for i, ax in enumerate(axes):
        for run in runs:
            ax.plot(t, run.stack("ex", "ey", "ez")[:, i], color="C0",
                    alpha=0.3, linewidth=0.8)
        mean_width = 2.0 if spec.mean_emphasis else 1.0
        ax.plot(t, mean[:, i], color="C1", linewidth=mean_width,
                label="mean")
        if spec.worst_highlight:
            ax.plot(t, runs[worst].stack("ex", "ey", "ez")[:, i], "k--",
                    linewidth=1.6, label=f"worst ({runs[worst].label})")
        ax.set_ylabel(_AXIS_LABELS[i])
        ax.grid(True, alpha=0.3)
    axes[-1].set_xlabel("t [s]")
    axes[0].legend(loc="upper right", fontsize=8)
    return fig


_BUILDERS = {
    "timeseries": _timeseries,
    "iso3d": _iso3d,
    "estimation": _estimation,
    "batch-overlay": _batch_overlay,
}


def make_figure(spec: FigureSpec) -> plt.Figure:
    """Load the referenced CSVs and build the figure in memory."""
    runs = load_runs(spec.inputs)
    return _BUILDERS[spec.kind](runs, spec)


def render(spec: FigureSpec) -> Path:
    """Build and write the figure; returns the output path."""
    fig = make_figure(spec)
    try:
        fig.savefig(spec.out, dpi=150, bbox_inches="tight")
    except OSError as exc:
        raise PlotError(f"cannot write {spec.out}: {exc}") from exc
    finally:
        plt.close(fig)
    return spec.out
