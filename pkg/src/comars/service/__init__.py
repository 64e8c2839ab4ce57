"""HTTP service exposing design construction, optimization, and evaluation."""

from .app import app

__all__ = ["app"]
