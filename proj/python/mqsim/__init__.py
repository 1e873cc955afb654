"""Python surface of the condensate measurement simulator.

Everything is implemented in the compiled extension; this package only
re-exports it under a stable name.
"""
from ._core import *  # noqa: F401,F403
from ._core import collapse  # noqa: F401

__all__ = [name for name in dir() if not name.startswith("_")]
