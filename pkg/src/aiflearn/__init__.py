"""Learning task-to-classifier mappings with approximately equal individual error rates."""

__version__ = "0.1.0"
