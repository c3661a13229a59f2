"""Duopoly vaccine pricing: demand estimation, private equilibrium, public negotiation."""

__version__ = "0.1.0"
