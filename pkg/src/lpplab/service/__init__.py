"""HTTP service exposing run, summarize, oracle-check, and version."""

from .app import create_app

__all__ = ["create_app"]
