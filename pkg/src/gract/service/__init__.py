"""FastAPI service wrapping the core index."""

from .app import app, create_app

__all__ = ["app", "create_app"]
