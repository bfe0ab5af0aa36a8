"""Offline rendering of experiment CSV exports."""

from .render import (
    ExpectationTable,
    Figure1Points,
    PlotJob,
    SchemaError,
    load_expectation,
    load_figure1,
    render,
)

__version__ = "0.1.0"
