"""HTTP service exposing the evaluation engine."""

from .app import create_app

__all__ = ["create_app"]
