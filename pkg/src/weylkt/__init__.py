"""Reducibility of cubic Killing tensors in static axisymmetric vacuum spacetimes."""

__version__ = "0.1.0"
