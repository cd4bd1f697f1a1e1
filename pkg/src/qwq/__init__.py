"""Gaussian-model and exact-dynamics toolkit for two noninteracting quantum walkers."""

__version__ = "0.1.0"
