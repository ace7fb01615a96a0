"""Exact lifting of cochain complexes, maps and homotopies along
square-zero deformations of matrix categories over finite rings."""

__version__ = "0.1.0"
