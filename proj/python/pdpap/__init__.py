from ._pdpap import *  # noqa: F401,F403
from ._pdpap import __doc__  # noqa: F401
