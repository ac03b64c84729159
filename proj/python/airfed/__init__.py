"""Federated least squares over a fading multiple-access channel."""

from ._airfed import *  # noqa: F401,F403
from ._airfed import AirfedError, validate

__all__ = [name for name in dir() if not name.startswith("_")]
