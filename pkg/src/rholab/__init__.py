"""Idealized Pollard Rho discrete-log walk and exact/Monte Carlo checks of its mixing bounds."""

__version__ = "0.1.0"
