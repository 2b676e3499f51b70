"""Finite quantum sets, quantum adjacency operators and the quantum Fourier transform."""

from .tolerances import DEFAULT, Tolerances

__version__ = "0.1.0"

__all__ = ["DEFAULT", "Tolerances", "__version__"]
