"""Commutator-multiplier tools for velocity averaging in kinetic transport equations."""

__version__ = "0.1.0"
