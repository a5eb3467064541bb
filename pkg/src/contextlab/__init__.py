"""Quantum vs. Kochen-Specker predictions for an interferometric spin/path test."""

__version__ = "0.1.0"
