"""Recursive multimodal infilling for sequential text-visual data."""

__version__ = "0.1.0"
