"""Simulation, training and covering-number bounds for variational quantum circuits."""

__version__ = "0.1.0"
