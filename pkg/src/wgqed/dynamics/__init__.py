"""Hamiltonians, unitary and open-system evolution, trajectories and observables."""
from .hamiltonians import *  # noqa: F401,F403
from .master import *  # noqa: F401,F403
from .observables import *  # noqa: F401,F403
from .space import *  # noqa: F401,F403
from .trajectories import *  # noqa: F401,F403
from .unitary import *  # noqa: F401,F403
