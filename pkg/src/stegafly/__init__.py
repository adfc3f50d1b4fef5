"""Hybrid-firefly LSB steganography toolkit."""

__version__ = "0.1.0"
