"""Markov-modulated on/off traffic models, FIFO queue experiments and Hurst estimation."""
from __future__ import annotations

__version__ = "0.1.0"
