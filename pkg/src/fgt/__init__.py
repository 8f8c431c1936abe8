"""Plane-wave fast Gauss transform for discrete points and tensor-product densities."""

from .backend import BACKEND

__version__ = "0.1.0"
