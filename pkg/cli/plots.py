"""
cli/plots.py

Static SVG renderings of sweep and front CSVs.

Sweep: one panel per (train_capacity row, train_interval column), x = beta_c,
one line per beta_tau for the chosen indicator.
Front: rer_congestion against other_congestion, coloured by beta_tau, marker
area from beta_c.

Text stays text and no date is embedded, so equal input gives equal bytes.
"""

import logging
from io import StringIO
from pathlib import Path
from typing import Union

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402

from engine.output import write_text_atomic  # noqa: E402

logger = logging.getLogger(__name__)

matplotlib.rcParams["svg.fonttype"] = "none"
matplotlib.rcParams["svg.hashsalt"] = "modalshift"

FRONT_GID = "front-points"
SERIES_GID_PREFIX = "series-"
DEFAULT_INDICATOR = "avg_travel_time"
MARKER_SIZE_RANGE = (12.0, 96.0)  # points^2


def _save(fig, out: Union[str, Path]) -> Path:
    buffer = StringIO()
    fig.savefig(buffer, format="svg", metadata={"Date": None})
    plt.close(fig)
    text = buffer.getvalue()
    if not text.endswith("\n"):
        text += "\n"
    return write_text_atomic(out, text)


def plot_sweep(frame: pd.DataFrame, out: Union[str, Path], indicator: str = DEFAULT_INDICATOR) -> Path:
    column = f"{indicator}_mean"
    if column not in frame.columns:
        raise ValueError(f"sweep CSV has no column {column}")
    capacities = sorted(frame["train_capacity"].unique())
    intervals = sorted(frame["train_interval"].unique())
    fig, axes = plt.subplots(
        len(capacities),
        len(intervals),
        figsize=(3.2 * len(intervals), 2.6 * len(capacities)),
        squeeze=False,
        sharex=True,
    )
    for r, capacity in enumerate(capacities):
        for c, interval in enumerate(intervals):
            ax = axes[r][c]
            panel = frame[(frame["train_capacity"] == capacity) & (frame["train_interval"] == interval)]
            for beta_tau, series in panel.groupby("beta_tau", sort=True):
                series = series.sort_values("beta_c")
                (line,) = ax.plot(series["beta_c"], series[column], marker="o", markersize=3,
                                  label=f"beta_tau={beta_tau:g}")
                line.set_gid(f"{SERIES_GID_PREFIX}C{capacity}-I{interval}-{beta_tau:g}")
            ax.set_title(f"C={capacity}, I={interval}", fontsize=9)
            ax.set_xlabel("beta_c")
            ax.set_ylabel(indicator)
    axes[0][-1].legend(fontsize=7, loc="best")
    fig.tight_layout()
    logger.info("[CLI] sweep plot: %d panels, indicator=%s", len(capacities) * len(intervals), indicator)
    return _save(fig, out)


def marker_sizes(beta_c: pd.Series) -> np.ndarray:
    """beta_c min-max rescaled into MARKER_SIZE_RANGE; a constant column gets the midpoint."""
    values = beta_c.astype(float).to_numpy()
    low, high = MARKER_SIZE_RANGE
    if values.size == 0:
        return values
    span = values.max() - values.min()
    if span <= 0:
        return np.full(values.size, (low + high) / 2.0)
    return low + (values - values.min()) / span * (high - low)


def plot_front(frame: pd.DataFrame, out: Union[str, Path]) -> Path:
    for column in ("rer_congestion", "other_congestion", "beta_tau", "beta_c"):
        if column not in frame.columns:
            raise ValueError(f"front CSV has no column {column}")
    fig, ax = plt.subplots(figsize=(5.0, 4.0))
    points = ax.scatter(frame["rer_congestion"], frame["other_congestion"], c=frame["beta_tau"],
                        cmap="viridis", s=marker_sizes(frame["beta_c"]))
    points.set_gid(FRONT_GID)
    fig.colorbar(points, ax=ax, label="beta_tau")
    ax.set_xlabel("rer_congestion")
    ax.set_ylabel("other_congestion")
    ax.set_title("marker size: beta_c", fontsize=9)
    fig.tight_layout()
    logger.info("[CLI] front plot: %d points", len(frame))
    return _save(fig, out)


def plot_csv(input_csv: Union[str, Path], kind: str, out: Union[str, Path],
             indicator: str = DEFAULT_INDICATOR) -> Path:
    frame = pd.read_csv(input_csv)
    if kind == "sweep":
        return plot_sweep(frame, out, indicator)
    if kind == "front":
        return plot_front(frame, out)
    raise ValueError(f"unknown plot kind {kind!r}")
