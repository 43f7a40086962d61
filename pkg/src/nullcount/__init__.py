"""Counting valuations and completions of incomplete databases."""

__version__ = "0.1.0"
