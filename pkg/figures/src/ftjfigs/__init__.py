"""Deterministic figure rendering from ftjsim CSV outputs.

These scripts never recompute physics: they read the simulator's CSV files,
convert units for display (C/m^2 -> uC/cm^2, A -> pA), and plot with a fixed
style so that the same CSV input always yields a byte-identical image.
"""

__version__ = "0.1.0"

from .render import FIGURES, FigureError, render, render_all  # noqa: F401
