"""Online streaming feature selection with Geometric Online Adaptation."""

__version__ = "0.1.0"
