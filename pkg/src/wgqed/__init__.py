"""Phonon-mediated spin networks: compiler and open-system simulator."""

__version__ = "0.1.0"
