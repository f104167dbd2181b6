"""Simulation and verification lab for the k-fold XOR of Forrelation."""

__version__ = "0.1.0"
