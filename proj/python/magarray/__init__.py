"""Permanent-magnet array field simulation (C++ core)."""

from ._core import *  # noqa: F401,F403
from ._core import MU0, simulate, synthetic_halbach  # noqa: F401

__version__ = "0.1.0"
