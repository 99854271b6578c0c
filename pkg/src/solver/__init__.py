"""
Harmonic Solver

This package relaxes the axisymmetric harmonic map into the hyperbolic
plane and evaluates its energies:
- Solver settings and graded grids
- Model maps carrying the rod singularities
- Fields stored as differences from the model, with checkpoints
- Residuals and red-black nonlinear Gauss-Seidel relaxation
- Harmonic energy, reduced energy and the convexity check
- The divergence identity balance between two geometries
"""

from .grid import SolverConfig, SolverGrid, parse_grid
from .model_map import (ModelMap, build_model_map, corner_matrix, rod_potential, smooth_step, weyl_potential,
                        z_partition)
from .field import (PINNED, TIE_U, TIE_W, HyperbolicField, SolverDiagnostics, axis_kinds, load_checkpoint,
                    model_field, sample_field, save_checkpoint)
from .relax import HarmonicMapOperator, discrete_energy, relax, residual, residual_norm
from .energy import (Margins, ReducedEnergyReport, Region, convexity_gap_check, default_margins,
                     distance_integral, energy, rebase, reduced_energy, sigma_region)
from .identity import BalanceReport, divergence_identity_check

__all__ = [
    'SolverConfig', 'SolverGrid', 'parse_grid',
    'ModelMap', 'build_model_map', 'corner_matrix', 'rod_potential', 'smooth_step', 'weyl_potential',
    'z_partition',
    'PINNED', 'TIE_U', 'TIE_W', 'HyperbolicField', 'SolverDiagnostics', 'axis_kinds', 'load_checkpoint',
    'model_field', 'sample_field', 'save_checkpoint',
    'HarmonicMapOperator', 'discrete_energy', 'relax', 'residual', 'residual_norm',
    'Margins', 'ReducedEnergyReport', 'Region', 'convexity_gap_check', 'default_margins',
    'distance_integral', 'energy', 'rebase', 'reduced_energy', 'sigma_region',
    'BalanceReport', 'divergence_identity_check',
]
