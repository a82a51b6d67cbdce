"""Test the plot functions."""
import matplotlib

matplotlib.use("Agg")

import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402
from matplotlib import pyplot as plt  # noqa: E402

from kone import plot  # noqa: E402
from kone.measure.core import DiscreteMeasure, Window  # noqa: E402


def test_plot_measure():
    """Test plotting the atoms of a measure."""
    eta = DiscreteMeasure(
        [[0.5, 0.5], [1.5, 1.0]], [1.0, 0.25], Window.cube(2, 0.0, 2.0)
    )
    ax = plot.measure(eta)
    assert ax.get_xlim() == (0.0, 2.0)
    assert ax.get_title() == "2 atoms, mass 1.25"
    plt.close("all")


def test_plot_empty_measure():
    """Test that the empty measure plots without atoms."""
    ax = plot.measure(DiscreteMeasure.empty(Window.cube(2, 0.0, 1.0)))
    assert len(ax.collections) == 0
    plt.close("all")


def test_plot_trajectory_and_trace():
    """Test plotting time series and chain traces."""
    series = pd.DataFrame(
        {"t": [0.0, 0.1, 0.2], "count": [3, 3, 4], "mass": [1.0, 1.1, 1.3]}
    )
    ax = plot.trajectory(series)
    assert len(ax.get_lines()) == 2
    ax = plot.trace(np.arange(5.0))
    assert ax.get_ylabel() == "energy"
    plt.close("all")


def test_plot_error_slope():
    """Test the log-log plot of consistency errors."""
    ax = plot.error_slope([4e-3, 2e-3, 1e-3], [0.4, 0.2, 0.1])
    assert len(ax.get_lines()) == 2
    plt.close("all")


def test_plot_report_residuals_skips_lines_without_se():
    """Test that only lines with a standard error are drawn."""
    reports = [
        {"check": "mecke", "lhs": 1.0, "rhs": 0.9, "se": 0.1, "pass": True},
        {"check": "c2", "lhs": 5.0, "rhs": 0.0, "pass": True},
        {"check": "ibp", "lhs": 1.0, "rhs": 0.0, "se": 0.1, "pass": False},
    ]
    ax = plot.report_residuals(reports)
    assert len(ax.patches) == 2
    plt.close("all")
