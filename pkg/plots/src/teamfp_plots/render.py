"""Deterministic mean-and-band figure rendering.

One mean curve plus a shaded band at mean +/- one standard deviation per
series, with the statistics taken verbatim from the aggregate CSV columns
``<column>_mean`` and ``<column>_std``.  Figure size, fonts, and dpi are
fixed so repeated renders of the same inputs are byte-stable.
"""

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Tuple

import matplotlib
import numpy as np

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .spec import PlotSpec, Series

FIGSIZE = (6.4, 4.0)
DPI = 150
FONT_SIZE = 10
BAND_ALPHA = 0.25
X_COLUMNS = ("iteration", "episode")


class SchemaError(Exception):
    """Aggregate CSV does not carry the columns the spec asks for."""


@dataclass(frozen=True)
class RenderedSeries:
    """Exactly the arrays drawn for one series."""

    label: str
    x: np.ndarray
    mean: np.ndarray
    lower: np.ndarray
    upper: np.ndarray


def read_aggregate(path: Path, column: str):
    """Return (x, mean, std) for ``column`` from an aggregate CSV."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file")
        rows = [row for row in reader]
    index = {name: j for j, name in enumerate(header)}
    x_col = next((c for c in X_COLUMNS if c in index), None)
    if x_col is None:
        raise SchemaError(f"{path}: missing column 'iteration' (or 'episode')")
    for needed in (f"{column}_mean", f"{column}_std"):
        if needed not in index:
            raise SchemaError(f"{path}: missing column '{needed}'")
    try:
        x = np.array([float(r[index[x_col]]) for r in rows])
        mean = np.array([float(r[index[f"{column}_mean"]]) for r in rows])
        std = np.array([float(r[index[f"{column}_std"]]) for r in rows])
    except (ValueError, IndexError) as e:
        raise SchemaError(f"{path}: malformed row ({e})")
    return x, mean, std


def _draw(ax, spec: PlotSpec, series: Series) -> RenderedSeries:
    x, mean, std = read_aggregate(series.csv, spec.column)
    lower, upper = mean - std, mean + std
    ax.fill_between(x, lower, upper, color=series.color, alpha=BAND_ALPHA,
                    linewidth=0)
    ax.plot(x, mean, color=series.color, linewidth=2.0, label=series.label)
    return RenderedSeries(label=series.label, x=x, mean=mean,
                          lower=lower, upper=upper)


def render(spec: PlotSpec) -> Tuple[RenderedSeries, ...]:
    """Write the figure for ``spec`` and return the arrays that were drawn."""
    with plt.rc_context({"font.size": FONT_SIZE, "svg.hashsalt": "teamfp"}):
        fig, ax = plt.subplots(figsize=FIGSIZE, dpi=DPI)
        try:
            rendered = tuple(_draw(ax, spec, s) for s in spec.series)
            if spec.bound is not None:
                ax.axhline(spec.bound, color="black", linestyle="--",
                           linewidth=1.0, label=f"bound {spec.bound:g}")
            if spec.log_x:
                ax.set_xscale("log")
            ax.set_xlabel(spec.x_label)
            ax.set_ylabel(spec.y_label)
            ax.legend()
            fig.tight_layout()
            spec.out.parent.mkdir(parents=True, exist_ok=True)
            fig.savefig(spec.out)
        finally:
            plt.close(fig)
    return rendered
