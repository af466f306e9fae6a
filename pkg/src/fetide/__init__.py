"""Diffusion-limited ligand-receptor binding on a FET biochemical gate.

The bound fraction on the gate obeys a kinetics equation coupled through a
singular convolution of its own time derivative.  This package provides the
parameter groups (:mod:`~fetide.model`), exact kernel-hat integrals
(:mod:`~fetide.kernel`), the method-of-lines solver (:mod:`~fetide.solver`),
brute-force oracles (:mod:`~fetide.oracle`), observables and the convergence
study (:mod:`~fetide.analysis`) and the ``fetide`` command line.
"""

__version__ = "0.1.0"

from .kernel import KernelMatrix, Mesh, assemble_matrix, hat_integral, kernel_value, odd_series, polylog
from .model import DimensionalParams, DimensionlessParams, nondimensionalize, validate_ranges
from .solver import SolveConfig, Trajectory, equilibrium, integrate, integrate_fixed_implicit, rhs

__all__ = [
    "DimensionalParams",
    "DimensionlessParams",
    "KernelMatrix",
    "Mesh",
    "SolveConfig",
    "Trajectory",
    "assemble_matrix",
    "equilibrium",
    "hat_integral",
    "integrate",
    "integrate_fixed_implicit",
    "kernel_value",
    "nondimensionalize",
    "odd_series",
    "polylog",
    "rhs",
    "validate_ranges",
]
