"""Fill service: ranked single-word candidates for masked positions."""

__version__ = "0.1.0"
