"""Numerical workbench for Kahler geometry, coherent-state transforms, and
singular reduction on small compact groups."""

from quantlab.report import CheckReport

__all__ = ["CheckReport"]
__version__ = "0.1.0"
