"""Free-energy reinforcement learning with clamped quantum Boltzmann machines."""

__version__ = "0.1.0"
