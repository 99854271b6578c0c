"""
Rod Model

This package handles the orbit-space boundary data of toric 4-manifolds:
- Rod structures and rod data sets
- Corner admissibility and report-style validation
- Asymptotic classes and the topology of the end
- The declarative rod file format
"""

from .rod_data import (Rod, RodDataSet, RodStructure, ValidationIssue, ValidationReport,
                       corner_admissible, corner_determinant, validate_rod_data)
from .asymptotic import AsymptoticClass, CrossSection, asymptotic_topology, normalizing_matrix
from .rod_file import format_rods, load_rods, parse_rods, save_rods

__all__ = [
    'Rod', 'RodDataSet', 'RodStructure', 'ValidationIssue', 'ValidationReport',
    'corner_admissible', 'corner_determinant', 'validate_rod_data',
    'AsymptoticClass', 'CrossSection', 'asymptotic_topology', 'normalizing_matrix',
    'format_rods', 'load_rods', 'parse_rods', 'save_rods',
]
