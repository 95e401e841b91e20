"""Batch figure rendering for se3est run logs.

Consumes the run-log CSV contract only; no in-process coupling to the
estimator package."""

from .reader import SchemaError, load_run_csv
from .render import FIGURE_KINDS, PlotSpec, build_figure, render

__version__ = "0.1.0"
