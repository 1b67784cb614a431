"""HTTP service exposing the sketch library."""

from .app import app, create_app

__all__ = ["app", "create_app"]
