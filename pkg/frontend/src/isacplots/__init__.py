"""Plotting frontend for waveform-experiment CSV results.

Consumes only the CSV files written by the ``thzisac`` command-line tool;
no simulator internals are imported.
"""

from .schema import SchemaError, load_rows
from .render import render_ccdf, render_rmse

__version__ = "0.1.0"

__all__ = ["SchemaError", "load_rows", "render_ccdf", "render_rmse"]
