"""Photon-number pattern simulation of a four-mode interferometer and learned state estimation."""

__version__ = "0.1.0"
