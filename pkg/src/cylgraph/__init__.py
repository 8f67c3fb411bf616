"""Truncated proximity-graph Laplacians on flat manifolds with cylindrical boundary."""

from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]
