"""Numerical certification of sphere/hypersurface transversality for the cyclic mixed family f_{II,t}."""

__version__ = "0.1.0"
