"""Crossed-product spectral triple laboratory."""
__version__ = "0.1.0"
