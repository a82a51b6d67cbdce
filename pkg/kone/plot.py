"""Plot functions to inspect samples, trajectories and checks."""

from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from matplotlib import axes
from matplotlib import pyplot as plt

from kone.measure.core import DiscreteMeasure

__all__ = [
    "error_slope",
    "measure",
    "report_residuals",
    "trace",
    "trajectory",
]


def _axes(ax: Optional[axes.Axes], figsize) -> axes.Axes:
    if ax is None:
        _, ax = plt.subplots(figsize=figsize)
    return ax


def measure(
    eta: DiscreteMeasure,
    ax: Optional[axes.Axes] = None,
    figsize: Optional[Tuple[int, int]] = None,
    scale: float = 40.0,
    color: str = "tab:blue",
) -> axes.Axes:
    """Plot the atoms of a two-dimensional measure.

    Parameters
    ----------
    eta (DiscreteMeasure): Measure to plot; only the first two
        coordinates are used.
    ax (Optional[axes.Axes], optional): Matplotlib axes object.
        Defaults to None, in which case a new figure is created.
    figsize (Optional[Tuple[int, int]], optional): Figure size of a new
        figure.
    scale (float, optional): Marker area of an atom of weight 1. Marker
        areas are proportional to the weights.
    color (str, optional): Marker colour.

    Returns
    -------
    axes.Axes: Matplotlib axes object.
    """
    ax = _axes(ax, figsize)
    if len(eta):
        x = eta.positions
        y = x[:, 1] if eta.dim > 1 else np.zeros(len(eta))
        ax.scatter(x[:, 0], y, s=scale * eta.weights, c=color, alpha=0.7)
    lo, hi = eta.window.lo, eta.window.hi
    ax.set_xlim(lo[0], hi[0])
    if eta.dim > 1:
        ax.set_ylim(lo[1], hi[1])
        ax.set_aspect("equal")
    ax.set_xlabel("x_1")
    ax.set_ylabel("x_2")
    ax.set_title(f"{len(eta)} atoms, mass {eta.total_mass():.3g}")
    return ax


def trajectory(
    series: pd.DataFrame,
    columns: Optional[Sequence[str]] = None,
    ax: Optional[axes.Axes] = None,
    figsize: Optional[Tuple[int, int]] = None,
) -> axes.Axes:
    """Plot recorded observables against time."""
    ax = _axes(ax, figsize)
    if columns is None:
        columns = [c for c in series.columns if c != "t"]
    for column in columns:
        ax.plot(series["t"], series[column], label=column)
    ax.set_xlabel("t")
    ax.legend()
    return ax


def trace(
    values: Sequence[float],
    label: str = "energy",
    ax: Optional[axes.Axes] = None,
    figsize: Optional[Tuple[int, int]] = None,
) -> axes.Axes:
    """Plot a Markov chain trace, e.g. the energy of Gibbs samples."""
    ax = _axes(ax, figsize)
    ax.plot(np.arange(len(values)), values, lw=0.8)
    ax.set_xlabel("sample")
    ax.set_ylabel(label)
    return ax


def error_slope(
    dts: Sequence[float],
    errors: Sequence[float],
    ax: Optional[axes.Axes] = None,
    figsize: Optional[Tuple[int, int]] = None,
) -> axes.Axes:
    """Log-log plot of the generator consistency error against dt, with a
    reference line of slope one."""
    ax = _axes(ax, figsize)
    dts = np.asarray(dts, dtype=float)
    errors = np.asarray(errors, dtype=float)
    ax.loglog(dts, errors, "o-", label="error")
    ax.loglog(dts, errors[-1] * dts / dts[-1], "k--", label="slope 1")
    ax.set_xlabel("dt")
    ax.set_ylabel("|estimate - L F|")
    ax.legend()
    return ax


def report_residuals(
    reports: List[dict],
    ax: Optional[axes.Axes] = None,
    figsize: Optional[Tuple[int, int]] = None,
) -> axes.Axes:
    """Plot ``(lhs - rhs) / se`` per report line with the tolerance band.

    Lines without a positive standard error are skipped.
    """
    ax = _axes(ax, figsize)
    rows = [r for r in reports if r.get("se", 0) and np.isfinite(r["se"])]
    z = [(r["lhs"] - r["rhs"]) / r["se"] for r in rows]
    colors = ["tab:green" if r["pass"] else "tab:red" for r in rows]
    ax.bar(np.arange(len(z)), z, color=colors)
    ax.set_xticks(np.arange(len(z)))
    ax.set_xticklabels([r["check"] for r in rows], rotation=90)
    ax.axhline(3.0, color="k", ls=":")
    ax.axhline(-3.0, color="k", ls=":")
    ax.set_ylabel("(lhs - rhs) / se")
    return ax
