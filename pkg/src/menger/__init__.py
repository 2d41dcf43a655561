"""Finite functional Menger algebras and their stationary subsets."""
__version__ = "0.1.0"
