"""HTTP service wrapping the core package; ``uvicorn msplot.service:app``."""

from .app import app, create_app  # noqa: F401
