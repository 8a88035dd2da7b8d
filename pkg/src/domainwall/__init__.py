"""Domain-wall solitons of Liouville type: closed forms, first-integral
quadrature, and variational solvers for coupled systems."""

from . import abelian_wall, core, ew_minimizer, liouville_cs, u2_minimizer, verify, wspace
from .core import Grid, Profile

__version__ = "0.1.0"

__all__ = ["abelian_wall", "core", "ew_minimizer", "liouville_cs", "u2_minimizer", "verify",
           "wspace", "Grid", "Profile"]
