"""Age of information of a primary link sharing spectrum with energy-harvesting secondary users."""

__version__ = "0.1.0"
