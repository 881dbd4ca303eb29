"""FastAPI service wrapping the toolkit; ``handlers`` are usable in-process."""

from . import handlers, schemas

__all__ = ["handlers", "schemas"]
