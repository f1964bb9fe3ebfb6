"""Data-driven approximations of the covariance ellipsoid of a random vector."""
__version__ = "0.1.0"
