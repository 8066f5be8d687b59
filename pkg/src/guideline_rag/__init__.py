"""Hybrid retrieval-augmented generation engine for clinical guideline corpora."""

__version__ = "0.1.0"
