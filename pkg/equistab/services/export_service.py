"""Trajectory samples as CSV, JSON or an SVG plot."""
import csv
import io
import json
import logging

import matplotlib
import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

from equistab.core.exceptions import DimensionMismatchError, UnsupportedFormatError
from equistab.services.loops import TrigLoop

logger = logging.getLogger(__name__)

FORMATS = ("csv", "svg", "json")
PLANES = {"xy": (0, 1), "xz": (0, 2), "yz": (1, 2)}
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f")
FIGURE_INCHES = 6.0
SVG_SALT = "equistab"


def _axes(plane: str, d: int) -> tuple[int, int]:
    if plane not in PLANES:
        raise DimensionMismatchError(f"unknown projection plane '{plane}'", details={"plane": plane})
    axes = PLANES[plane]
    if max(axes) >= d:
        raise DimensionMismatchError(f"plane '{plane}' needs d = 3", details={"plane": plane, "d": d})
    return axes


def to_csv(times: np.ndarray, positions: np.ndarray) -> str:
    d = positions.shape[2]
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["t", "body", *(f"x{a + 1}" for a in range(d))])
    for body in range(positions.shape[1]):
        for t, x in zip(times, positions[:, body]):
            writer.writerow([repr(float(t)), body + 1, *(repr(float(v)) for v in x)])
    return buffer.getvalue()


def to_json(loop: TrigLoop, times: np.ndarray, positions: np.ndarray) -> str:
    payload = {
        "period": loop.period,
        "n": loop.n,
        "d": loop.d,
        "times": times.tolist(),
        "bodies": [positions[:, body].tolist() for body in range(loop.n)],
    }
    return json.dumps(payload)


def plot_figure(positions: np.ndarray, plane: str = "xy") -> Figure:
    """One closed line per body on equal axes, without ticks or frame."""
    i, j = _axes(plane, positions.shape[2])
    closed = np.concatenate([positions, positions[:1]], axis=0)

    figure = Figure(figsize=(FIGURE_INCHES, FIGURE_INCHES))
    FigureCanvasAgg(figure)
    ax = figure.subplots()
    for body in range(positions.shape[1]):
        ax.plot(closed[:, body, i], closed[:, body, j], color=COLORS[body % len(COLORS)], linewidth=1.0, gid=f"body{body + 1}")
    ax.set_aspect("equal")
    ax.margins(0.05)
    ax.set_axis_off()
    return figure


def to_svg(positions: np.ndarray, plane: str = "xy") -> str:
    figure = plot_figure(positions, plane)
    buffer = io.StringIO()
    with matplotlib.rc_context({"svg.hashsalt": SVG_SALT}):
        figure.savefig(buffer, format="svg", metadata={"Date": None})
    return buffer.getvalue()


def export_plot(loop: TrigLoop, Q: int, fmt: str, plane: str = "xy") -> bytes:
    """
    Sample the loop at Q uniform times and render it.

    Args:
        loop: Orbit over one full period.
        Q: Samples per body, at least 2.
        fmt: csv, svg or json.
        plane: Projection plane for d = 3 plots.

    Returns:
        UTF-8 encoded document.
    """
    if fmt not in FORMATS:
        raise UnsupportedFormatError(fmt)
    if Q < 2:
        raise DimensionMismatchError(f"need at least 2 samples, got {Q}", details={"samples": Q})

    times = loop.grid(Q)
    positions = loop.positions(times)
    if fmt == "csv":
        text = to_csv(times, positions)
    elif fmt == "json":
        text = to_json(loop, times, positions)
    else:
        text = to_svg(positions, plane)
    logger.info("export.done", extra={"format": fmt, "samples": Q, "bodies": loop.n})
    return text.encode("utf-8")
