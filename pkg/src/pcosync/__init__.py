"""Event-driven simulation and verification of pulse-coupled oscillators with binary resets."""

__version__ = "0.1.0"
