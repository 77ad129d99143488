"""Quantum arrival-time distributions for a Gaussian wave train."""

__version__ = "0.1.0"

from ._backend import BACKEND  # "cython" or "numpy"

__all__ = ["BACKEND", "__version__"]
