"""
cli/test_plots.py

Structural checks on the emitted SVG files.

Tests verify:
1. A 4-row front CSV gives exactly 4 scatter marks, sized by beta_c
2. Sweep plot labels its axes and draws one series per beta_tau
3. Same input gives the same bytes

Run:
    pytest cli/test_plots.py -v
"""

import xml.etree.ElementTree as ET

import pandas as pd
import pytest

from cli.plots import (
    FRONT_GID,
    MARKER_SIZE_RANGE,
    SERIES_GID_PREFIX,
    marker_sizes,
    plot_csv,
    plot_front,
    plot_sweep,
)
from engine.indicators import SCALAR_INDICATORS
from engine.optimizer import FRONT_COLUMNS
from engine.sweep import sweep_columns

SVG = "{http://www.w3.org/2000/svg}"


def front_csv(path):
    frame = pd.DataFrame(
        [
            [0.5, -1.0, 0.9, 0.1, 0, float("inf")],
            [1.0, 0.0, 0.6, 0.2, 0, 1.5],
            [2.0, 1.0, 0.3, 0.4, 0, 1.2],
            [3.0, 2.0, 0.1, 0.8, 0, float("inf")],
        ],
        columns=FRONT_COLUMNS,
    )
    frame.to_csv(path, index=False)
    return path


def sweep_frame(beta_tau_values):
    rows = []
    for beta_c in (-1.0, 0.0, 1.0):
        for beta_tau in beta_tau_values:
            row = {"beta_c": beta_c, "beta_tau": beta_tau, "train_capacity": 2000, "train_interval": 5,
                   "replications": 2}
            for name in SCALAR_INDICATORS:
                row[f"{name}_mean"] = 10.0 + beta_c + beta_tau
                row[f"{name}_sd"] = 0.5
            rows.append(row)
    return pd.DataFrame(rows, columns=sweep_columns())


def element_with_id(root, gid):
    for element in root.iter():
        if element.get("id") == gid:
            return element
    return None


def mark_count(group):
    """One <use> per point when markers share a path, one <path> per point otherwise."""
    uses = list(group.iter(f"{SVG}use"))
    if uses:
        return len(uses)
    return len(list(group.iter(f"{SVG}path")))


def test_front_plot_mark_count(tmp_path):
    out = plot_csv(front_csv(tmp_path / "front.csv"), "front", tmp_path / "front.svg")
    root = ET.parse(out).getroot()
    group = element_with_id(root, FRONT_GID)
    assert group is not None
    assert mark_count(group) == 4


def test_front_plot_constant_beta_c_mark_count(tmp_path):
    frame = pd.read_csv(front_csv(tmp_path / "front.csv")).assign(beta_c=1.0)
    root = ET.parse(plot_front(frame, tmp_path / "front.svg")).getroot()
    assert mark_count(element_with_id(root, FRONT_GID)) == 4


def test_marker_sizes_rescale_beta_c():
    low, high = MARKER_SIZE_RANGE
    sizes = marker_sizes(pd.Series([0.5, 1.0, 2.0, 3.0]))
    assert sizes[0] == pytest.approx(low)
    assert sizes[-1] == pytest.approx(high)
    assert sizes[1] == pytest.approx(low + 0.2 * (high - low))
    assert list(sizes) == sorted(sizes)


def test_marker_sizes_constant_column_midpoint():
    low, high = MARKER_SIZE_RANGE
    assert list(marker_sizes(pd.Series([2.0, 2.0, 2.0]))) == [(low + high) / 2.0] * 3


def test_front_plot_needs_beta_c(tmp_path):
    frame = pd.read_csv(front_csv(tmp_path / "front.csv")).drop(columns=["beta_c"])
    with pytest.raises(ValueError):
        plot_front(frame, tmp_path / "x.svg")


def test_sweep_plot_structure(tmp_path):
    beta_tau_values = [-1.0, 0.0, 1.0, 2.0]
    out = plot_sweep(sweep_frame(beta_tau_values), tmp_path / "sweep.svg", indicator="avg_travel_time")
    text = out.read_text()
    root = ET.fromstring(text)
    series = [e for e in root.iter() if (e.get("id") or "").startswith(SERIES_GID_PREFIX)]
    assert len(series) == len(beta_tau_values)
    labels = [e.text for e in root.iter(f"{SVG}text")]
    assert "beta_c" in labels
    assert "avg_travel_time" in labels
    assert text.endswith("\n")


def test_sweep_plot_unknown_indicator(tmp_path):
    with pytest.raises(ValueError):
        plot_sweep(sweep_frame([0.0]), tmp_path / "x.svg", indicator="happiness")


def test_front_plot_deterministic(tmp_path):
    frame = pd.read_csv(front_csv(tmp_path / "front.csv"))
    a = plot_front(frame, tmp_path / "a.svg").read_bytes()
    b = plot_front(frame, tmp_path / "b.svg").read_bytes()
    assert a == b
