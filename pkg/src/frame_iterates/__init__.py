"""Finite-window analysis of iterated frame families f_k = T^k f_0."""
__version__ = "0.1.0"
