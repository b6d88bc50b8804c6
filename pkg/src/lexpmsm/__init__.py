"""Lexicographic progress-measure certificates for omega-regular properties of probabilistic programs."""

__version__ = "0.1.0"
