from ._rfsep import *  # noqa: F401,F403
