"""Symbolic-numeric verification laboratory for a generalized
(2+1)-dimensional Boiti-Leon-Pempinelli water-wave system."""

__version__ = "0.1.0"
