"""Numerical laboratory for KP-II line solitons and their linearized dynamics."""
from __future__ import annotations

__version__ = "0.1.0"
