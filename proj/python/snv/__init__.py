"""SnV- photophysics simulation and analysis."""

from ._snv import *  # noqa: F401,F403
from ._snv import __version__  # noqa: F401
