"""Builders for the transfer chain, Kagome chiral magnet, gauge-encoded SU(n) magnets and the random SU(n) magnet."""
from .gauge import *  # noqa: F401,F403
from .ggm import *  # noqa: F401,F403
from .kagome import *  # noqa: F401,F403
from .qst import *  # noqa: F401,F403
from .sy import *  # noqa: F401,F403
