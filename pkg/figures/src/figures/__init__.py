"""SVG figure rendering for qite experiment CSVs."""

from .render import FIGURE_KINDS, FigureSpec, render

__all__ = ["FIGURE_KINDS", "FigureSpec", "render"]
