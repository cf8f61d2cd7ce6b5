"""Figure rendering for drosc CSV bundles."""

__version__ = "0.1.0"

from .render import RenderError, render
from .specs import FIGURE_SPECS, FigureSpec, Panel, Series

__all__ = ["render", "RenderError", "FIGURE_SPECS", "FigureSpec", "Panel", "Series", "__version__"]
