"""Zonal function networks with activation |t|^(2 gamma + 1) on the sphere S^q."""

__version__ = "0.1.0"
