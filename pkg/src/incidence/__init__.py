"""Incidence schemes of point-line flags on hypersurfaces over finite fields."""

from __future__ import annotations

__version__ = "0.1.0"
