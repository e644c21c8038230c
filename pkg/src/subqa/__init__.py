"""subqa: subtitle quality-assurance and production toolkit."""

__version__ = "0.1.0"
