"""Exact quantum Toda integrals and quantum cohomology of flag varieties."""

__version__ = "0.1.0"
