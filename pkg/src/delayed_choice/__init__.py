"""Forward-time models of Wheeler's delayed choice experiment and the delayed quantum eraser."""

__version__ = "0.1.0"
