"""Shortcut-to-adiabaticity design and simulation of sum-frequency generation."""

from ._core import *  # noqa: F401,F403
from ._core import __version__
