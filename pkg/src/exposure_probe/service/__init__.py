"""HTTP service exposing portrait membership queries and scoring helpers."""

from .app import create_app

__all__ = ["create_app"]
