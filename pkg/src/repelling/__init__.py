"""Stable configurations of mutually repelling points on compact manifolds."""
__version__ = "0.1.0"
