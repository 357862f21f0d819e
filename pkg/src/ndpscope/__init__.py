"""Trace-driven data-movement characterisation for near-data processing."""

__version__ = "0.1.0"
