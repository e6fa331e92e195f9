"""HTTP service wrapping the core package, plus the shared operations layer."""

from . import ops, schemas

__all__ = ["ops", "schemas"]
