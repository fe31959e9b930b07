"""Deterministic federated-learning carbon-accounting simulator."""

__version__ = "0.1.0"
