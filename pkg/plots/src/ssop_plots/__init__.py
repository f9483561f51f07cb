"""Batch figure rendering for ssop benchmark outputs.

Consumes only the documented CSV formats (summary, error-vs-time long
format, error/CPU-vs-r, forcing suite, mu sweeps, interaction maps, energy
tables) and writes deterministic static figures.
"""

from ssop_plots.figures import FIGURE_FAMILIES, FigureSpec, render

__version__ = "0.1.0"
