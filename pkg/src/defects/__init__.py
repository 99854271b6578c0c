"""
Defect Engine

This package implements conical singularities along the axis:
- Logarithmic angle defects with the regularity identity cross-check
- Defect profiles along rods and the integrated defect term
- X fluxes through small half-circles around corners
- The closed-form Reissner-Nordstrom / Schwarzschild defect difference
"""

from .angles import (CASES, DefectEstimate, angle_defect_at, axis_identity_difference, defect_estimate,
                     limit_schedule, phi_norm, rod_case, rho_schedule)
from .profiles import (DefectProfile, defect_profile, defect_profiles, defect_term, rn_defect_difference,
                       rod_nodes, tail_is_integrable)
from .corners import CornerChart, corner_flux, corner_flux_sequence

__all__ = [
    'CASES', 'DefectEstimate', 'angle_defect_at', 'axis_identity_difference', 'defect_estimate',
    'limit_schedule', 'phi_norm', 'rod_case', 'rho_schedule',
    'DefectProfile', 'defect_profile', 'defect_profiles', 'defect_term', 'rn_defect_difference',
    'rod_nodes', 'tail_is_integrable',
    'CornerChart', 'corner_flux', 'corner_flux_sequence',
]
