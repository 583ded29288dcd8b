"""Emotion-prediction-oriented emotion-cause pair extraction."""

__version__ = "0.1.0"
