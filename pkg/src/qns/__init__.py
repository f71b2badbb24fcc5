"""Hybrid quantum-classical incompressible Navier-Stokes solver.

The pressure Poisson solve of a classical projection method is performed
by a simulated HHL quantum linear-system algorithm and read out through
Chebyshev-polynomial state tomography with emulated shot noise, validated
against classical direct solves and analytical / published benchmarks.
"""

from .cfd import FlowField, NSConfig, classical_run, classical_step, tgv_exact
from .grid import Grid2D, StretchConfig, build_grid, build_periodic_grid, metric_coeff, stretch_map
from .hhl import HHLConfig, HHLResult, HHLSolver, hhl_solve
from .hybrid import HybridConfig, hybrid_run
from .linalg import (SparseSymMatrix, assemble_laplacian, direct_solve, pauli_decompose,
                     sym_eigendecomposition)
from .qsim import StateVector
from .qst import ChebyBasis, ShotModel, build_basis, reconstruct

__version__ = "0.1.0"

__all__ = [
    "FlowField", "NSConfig", "classical_run", "classical_step", "tgv_exact",
    "Grid2D", "StretchConfig", "build_grid", "build_periodic_grid", "metric_coeff",
    "stretch_map", "HHLConfig", "HHLResult", "HHLSolver", "hhl_solve",
    "HybridConfig", "hybrid_run", "SparseSymMatrix", "assemble_laplacian",
    "direct_solve", "pauli_decompose", "sym_eigendecomposition", "StateVector",
    "ChebyBasis", "ShotModel", "build_basis", "reconstruct", "__version__",
]
