"""Batch figure generation from teamfp aggregate CSVs."""

from .spec import PlotSpec, Series, SpecError, load_spec
from .render import RenderedSeries, SchemaError, render

__all__ = ["PlotSpec", "RenderedSeries", "SchemaError", "Series",
           "SpecError", "load_spec", "render"]

__version__ = "0.1.0"
