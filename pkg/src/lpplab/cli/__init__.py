"""Configuration, orchestration, persistence, and the console entry point."""

from .main import main

__all__ = ["main"]
