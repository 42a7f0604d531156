"""Hybrid polarization-OAM QKD link simulation and analysis."""

from ._core import *  # noqa: F401,F403
from ._core import __doc__  # noqa: F401
