"""HTTP service exposing a live monitoring session to the dashboard."""

from .app import create_app
from .runner import InteractiveAuthority, SessionRunner

__all__ = ["create_app", "InteractiveAuthority", "SessionRunner"]
