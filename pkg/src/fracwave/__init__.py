"""Viscoelastic wave equation in 1-D with fractional boundary damping.

The fractional boundary operator is realized through its diffusive
representation, so the whole system is advanced as a finite set of ODEs
coupled to a leapfrog wave solver.
"""

from .fracdiff import FracParams, DiffusiveGrid, build_diffusive_grid
from .viscomem import ExpKernel
from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = ["FracParams", "DiffusiveGrid", "build_diffusive_grid", "ExpKernel", "BACKEND"]
