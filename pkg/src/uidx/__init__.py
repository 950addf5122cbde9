"""Compressed inverted indexes for repetitive document collections."""

__version__ = "0.1.0"
