"""Ensemble-based end-to-end networks with gradient-saliency feature selection."""

__version__ = "0.1.0"
