"""Periodic-orbit and relative-capacity verification on annulus-times-torus phase spaces."""

__version__ = "0.1.0"
