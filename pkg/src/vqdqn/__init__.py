"""Variational-quantum-circuit deep Q-learning on a desk-scale simulator."""

__version__ = "0.1.0"
