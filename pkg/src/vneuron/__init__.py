"""Exact integer and dyadic arithmetic with spiking virtual neurons."""

__version__ = "0.1.0"
