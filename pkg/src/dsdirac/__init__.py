"""Dirac modes on de Sitter space: signature operator, projector weights, Hadamard scalars."""

__version__ = "0.1.0"
