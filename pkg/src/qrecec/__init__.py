"""Discrete-event simulation of encoded quantum repeater chains with classical error correction."""

__version__ = "0.1.0"
