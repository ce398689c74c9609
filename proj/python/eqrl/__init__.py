"""S1-equivariant quadrotor reinforcement learning workbench."""

from ._eqrl import *  # noqa: F401,F403
from ._eqrl import __version__  # noqa: F401
