"""Symbolic Veech subshift, Walters cocycle and its monochromatic perturbation."""

from . import cocycle, cone, perturb, subshift, words

__version__ = "0.1.0"

__all__ = ["words", "subshift", "cocycle", "cone", "perturb", "__version__"]
