"""
Comparison

This package assembles the mass inequality between a geometry and its
equilibrium geometry:
- The theorem gap report and the equality flag
- The bold mass
- The Reissner-Nordstrom / Schwarzschild closed forms and parameter sweeps
"""

from .gap import TheoremGapReport, bold_mass, check_comparable, family_distance, field_distance, theorem_gap
from .reissner_nordstrom import (RnComparisonReport, SweepRow, admissible, closed_form_slack, p_direct,
                                 p_exponential, rn_comparison, rn_partner, rn_vs_schwarzschild_P, sweep,
                                 sweep_csv, sweep_points)

__all__ = [
    'TheoremGapReport', 'bold_mass', 'check_comparable', 'family_distance', 'field_distance', 'theorem_gap',
    'RnComparisonReport', 'SweepRow', 'admissible', 'closed_form_slack', 'p_direct', 'p_exponential',
    'rn_comparison', 'rn_partner', 'rn_vs_schwarzschild_P', 'sweep', 'sweep_csv', 'sweep_points',
]
