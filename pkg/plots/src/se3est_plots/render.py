"""Figure construction and file output for the three log-figure kinds."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

from .reader import load_run_csv

FIGURE_KINDS = ("trajectory3d", "pose_errors", "velocity_errors")

# Pinned so identical inputs give byte-identical files.
_METADATA = {"Software": "se3est-plots"}


@dataclass(frozen=True)
class PlotSpec:
    kind: str
    input_path: str
    output_path: str
    title: str | None = None

    def __post_init__(self):
        if self.kind not in FIGURE_KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}; "
                             f"choices: {FIGURE_KINDS}")


def _trajectory3d(fig: Figure, data: dict) -> None:
    ax = fig.add_subplot(projection="3d")
    x, y, z = data["bx"], data["by"], data["bz"]
    ax.plot(x, y, z, color="tab:blue", linewidth=1.0)
    if x.size:
        ax.scatter([x[0]], [y[0]], [z[0]], color="tab:green", marker="o", label="start")
        ax.scatter([x[-1]], [y[-1]], [z[-1]], color="tab:red", marker="s", label="end")
        ax.legend(loc="upper left")
    ax.set_xlabel("x (m)")
    ax.set_ylabel("y (m)")
    ax.set_zlabel("z (m)")


def _error_traces(fig: Figure, data: dict, columns, labels) -> None:
    axes = fig.subplots(2, 1, sharex=True)
    for ax, col, label in zip(axes, columns, labels):
        ax.plot(data["t"], data[col], color="tab:blue", linewidth=1.0)
        ax.set_ylabel(label)
        ax.grid(True, alpha=0.3)
    axes[-1].set_xlabel("t (s)")


def build_figure(kind: str, data: dict) -> Figure:
    """Figure for one kind from already-loaded log columns."""
    fig = Figure(figsize=(7.0, 5.0), dpi=120)
    FigureCanvasAgg(fig)
    if kind == "trajectory3d":
        _trajectory3d(fig, data)
    elif kind == "pose_errors":
        _error_traces(fig, data, ("err_angle", "err_pos"),
                      ("attitude error (rad)", "position error (m)"))
    elif kind == "velocity_errors":
        _error_traces(fig, data, ("err_omega", "err_nu"),
                      ("angular velocity error (rad/s)",
                       "translational velocity error (m/s)"))
    else:
        raise ValueError(f"unknown figure kind {kind!r}; choices: {FIGURE_KINDS}")
    return fig


def render(spec: PlotSpec) -> Path:
    """Reads the CSV, writes the figure file, returns its path."""
    data = load_run_csv(spec.input_path)
    fig = build_figure(spec.kind, data)
    if spec.title:
        fig.suptitle(spec.title)
    out = Path(spec.output_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, metadata=_METADATA)
    return out
