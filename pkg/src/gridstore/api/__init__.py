"""HTTP service exposing the engine: windowed reads, edits, structural ops,
layout optimization, stats."""

from gridstore.api.app import create_app

__all__ = ["create_app"]
