"""CPML - COPD prediction from clinical notes and vital signs."""

__version__ = "0.1.0"
