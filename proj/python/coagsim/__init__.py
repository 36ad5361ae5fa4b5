"""Self-similar coagulation profiles: kernels, fixed-point operator, solver,
time-dependent dynamics and verification."""

from coagsim._core import *  # noqa: F401,F403
from coagsim._core import __doc__  # noqa: F401

__version__ = "0.1.0"
