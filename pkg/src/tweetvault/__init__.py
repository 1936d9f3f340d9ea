"""Desk-scale searchable archive toolkit for early sequential-id tweets."""

from tweetvault._kernels import BACKEND as KERNEL_BACKEND

__version__ = "0.1.0"

__all__ = ["KERNEL_BACKEND", "__version__"]
