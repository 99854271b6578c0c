"""
Mass Engine

This package evaluates the mass of toric instantons:
- Flux densities on model spheres (exact and reduced forms)
- Extrapolated masses against the flat model of a class
- The X flux at infinity between two geometries
"""

from .integrands import (RadialSample, exact_density, mass_integrand, radial_sample, reduced_fields,
                         x_flux_density)
from .estimate import (MassEstimate, estimate_mass, infinity_flux, infinity_flux_limit, is_monotone,
                       normalization_self_check)

__all__ = [
    'RadialSample', 'exact_density', 'mass_integrand', 'radial_sample', 'reduced_fields',
    'x_flux_density', 'MassEstimate', 'estimate_mass', 'infinity_flux', 'infinity_flux_limit',
    'is_monotone', 'normalization_self_check',
]
