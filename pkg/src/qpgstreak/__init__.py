"""Simulation and analysis toolkit for group-velocity-matched single-photon
up-conversion measured with a synchroscan streak camera."""

__version__ = "0.1.0"
