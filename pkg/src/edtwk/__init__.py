"""Entropic dynamic time warping kernels for time-varying correlation networks."""
__version__ = "0.1.0"
