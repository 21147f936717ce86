"""Simulator and analysis toolkit for photon-to-surface-plasmon teleportation."""

__version__ = "0.1.0"

from . import channel, counts, protocol, qcore, tomo  # noqa: F401
