"""Inference sidecar for the vcot pipeline's model wire contract."""

__version__ = "0.1.0"
