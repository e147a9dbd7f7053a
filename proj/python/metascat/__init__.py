"""Compact interaction-matrix models of metasurface-programmable scattering systems."""

from ._metascat import *  # noqa: F401,F403
from ._metascat import __doc__  # noqa: F401
