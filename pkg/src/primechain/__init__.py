"""Prime-representing recurrences with rigorous interval arithmetic."""

__version__ = "0.1.0"
