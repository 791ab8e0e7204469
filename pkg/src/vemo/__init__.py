"""Epoch scheduler and baseband co-simulator for shared-aperture RF missions."""

__version__ = "0.1.0"
