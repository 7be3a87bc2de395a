"""Render figures from hcrv CLI output CSVs (schema "hcrv-schema v1")."""

from .errors import SchemaMismatch
from .figures import KINDS, FigureSpec, render

__all__ = ["FigureSpec", "KINDS", "SchemaMismatch", "render"]
