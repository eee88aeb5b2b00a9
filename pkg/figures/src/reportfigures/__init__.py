"""Figures for robustness-versus-removal bench reports."""

__version__ = "0.1.0"

from .render import FigureInputError, load_report, render

__all__ = ["render", "load_report", "FigureInputError", "__version__"]
