"""Figure rendering for experiment CSV summaries."""

from .render import FigureKind, FigureSpec, MissingColumnError, PlotError, render

__all__ = ["FigureKind", "FigureSpec", "MissingColumnError", "PlotError", "render"]
