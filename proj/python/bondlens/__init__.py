"""Binomial short-rate lattice calibration, bond pricing, and implied
equity-parameter inversion. The heavy lifting lives in the compiled core;
this package re-exports it."""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401
