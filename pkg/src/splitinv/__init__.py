"""Simulation and inference for weakly M-dependent stationary processes."""
__version__ = "0.1.0"
