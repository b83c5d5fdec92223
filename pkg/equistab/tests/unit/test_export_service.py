import json
import math
import re

import numpy as np
import pytest

from equistab.core.exceptions import DimensionMismatchError, UnsupportedFormatError
from equistab.services.export_service import export_plot, plot_figure
from equistab.services.loops import TrigLoop


@pytest.fixture
def circle():
    """Two bodies on a unit circle, opposite each other, period 2 pi."""
    coefficients = np.zeros((3, 2, 2))
    coefficients[1] = [[1.0, 0.0], [-1.0, 0.0]]
    coefficients[2] = [[0.0, 1.0], [0.0, -1.0]]
    return TrigLoop(coefficients, 2 * math.pi)


@pytest.fixture
def tilted():
    coefficients = np.zeros((3, 2, 3))
    coefficients[1] = [[1.0, 0.0, 0.5], [-1.0, 0.0, -0.5]]
    coefficients[2] = [[0.0, 1.0, 0.0], [0.0, -1.0, 0.0]]
    return TrigLoop(coefficients, 2 * math.pi)


def test_csv_has_one_row_per_sample_and_body(circle):
    lines = export_plot(circle, 4, "csv").decode().splitlines()
    assert lines[0] == "t,body,x1,x2"
    assert len(lines) == 4 * 2 + 1
    t, body, x1, x2 = lines[2].split(",")
    assert float(t) == pytest.approx(math.pi / 2)
    assert body == "1"
    assert float(x1) == pytest.approx(0.0, abs=1e-15)
    assert float(x2) == pytest.approx(1.0)
    assert lines[5].split(",")[1] == "2"


def test_csv_values_round_trip_exactly(circle):
    lines = export_plot(circle, 3, "csv").decode().splitlines()
    expected = circle.positions(circle.grid(3))[:, 0, 0]
    parsed = [float(line.split(",")[2]) for line in lines[1:4]]
    assert parsed == expected.tolist()


def test_json_export(circle):
    payload = json.loads(export_plot(circle, 8, "json"))
    assert payload["n"] == 2
    assert payload["d"] == 2
    assert len(payload["times"]) == 8
    assert len(payload["bodies"]) == 2
    assert len(payload["bodies"][1]) == 8
    assert payload["bodies"][1][0] == [-1.0, 0.0]


def test_svg_has_one_group_per_body(circle):
    svg = export_plot(circle, 16, "svg").decode()
    assert "<svg" in svg
    assert svg.rstrip().endswith("</svg>")
    assert re.findall(r'<g id="body(\d+)"', svg) == ["1", "2"]


def test_svg_is_deterministic(circle):
    assert export_plot(circle, 16, "svg") == export_plot(circle, 16, "svg")


def test_plot_closes_each_loop(circle):
    positions = circle.positions(circle.grid(16))
    ax = plot_figure(positions).axes[0]
    assert len(ax.lines) == 2
    x, y = ax.lines[0].get_data()
    assert len(x) == 17
    assert (x[0], y[0]) == (x[-1], y[-1])
    assert y[4] == pytest.approx(1.0)


def test_plot_axes_are_equal_with_margin(circle):
    ax = plot_figure(circle.positions(circle.grid(64))).axes[0]
    assert ax.get_aspect() == 1.0
    assert ax.margins() == (0.05, 0.05)
    x_min, x_max = ax.get_xlim()
    assert x_min == pytest.approx(-1.1, rel=1e-3)
    assert x_max == pytest.approx(1.1, rel=1e-3)


@pytest.mark.parametrize("plane", ["xz", "yz"])
def test_spatial_orbit_projections(tilted, plane):
    """The vertical axis of both projections is z."""
    positions = tilted.positions(tilted.grid(8))
    ax = plot_figure(positions, plane).axes[0]
    assert len(ax.lines) == 2
    np.testing.assert_allclose(ax.lines[0].get_data()[1][:-1], positions[:, 0, 2])
    assert export_plot(tilted, 8, "svg", plane=plane).decode().count('<g id="body') == 2


def test_planar_orbit_has_no_z(circle):
    with pytest.raises(DimensionMismatchError):
        export_plot(circle, 8, "svg", plane="xz")


def test_unknown_format(circle):
    with pytest.raises(UnsupportedFormatError) as exc_info:
        export_plot(circle, 8, "png")
    assert exc_info.value.details == {"format": "png"}


def test_too_few_samples(circle):
    with pytest.raises(DimensionMismatchError):
        export_plot(circle, 1, "csv")
