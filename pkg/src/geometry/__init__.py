"""
Geometry Core

This package implements the reduced description of toric metrics:
- The Brill reduction G <-> (Z, Phi, V, W) with the twisted branch
- Distance and energy density on the hyperbolic plane
- Scalar curvature from finite differences and a sympy oracle
- Reconstruction of alpha in the Ricci-flat case
- CSV field dumps
"""

from .reduction import (HyperbolicPoint, ReducedFields, phi_from_point, reconstruct_torus_matrix,
                        reduce_torus_matrix)
from .hyperbolic import h2_distance, h2_energy_density
from .curvature import PerturbedSampler, scalar_curvature
from .curvature_oracle import CurvatureOracle, ricci_scalar
from .alpha import AlphaField, alpha_from_phi, alpha_gradient, model_alpha
from .field_io import FieldDump, dump_fields, load_fields, parse_fields

__all__ = [
    'HyperbolicPoint', 'ReducedFields', 'phi_from_point', 'reconstruct_torus_matrix',
    'reduce_torus_matrix', 'h2_distance', 'h2_energy_density',
    'PerturbedSampler', 'scalar_curvature', 'CurvatureOracle', 'ricci_scalar',
    'AlphaField', 'alpha_from_phi', 'alpha_gradient', 'model_alpha',
    'FieldDump', 'dump_fields', 'load_fields', 'parse_fields',
]
