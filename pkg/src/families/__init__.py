"""
Metric Families

This package provides the closed-form geometries as Brill samplers:
- Flat models for the ALE, ALF and AF classes and the h-modified ALF model
- Kerr, Reissner-Nordstrom and Schwarzschild instantons
- Taub-NUT, Taub-Bolt and charged Taub-Bolt
- Eguchi-Hanson
- Chen-Teo asymptotic data
- Parameter records, files and the family registry
"""

from .charts import ChartPoint, ProlateChart
from .base import BrillFamily, BrillSample
from .models import EuclideanR4, FlatAF, FlatALE, FlatALF, model_for_class, same_class
from .black_holes import Kerr, ReissnerNordstrom, Schwarzschild
from .nuts_bolts import ChargedTaubBolt, TaubBolt, TaubNUT
from .eguchi_hanson import EguchiHanson
from .chen_teo import ChenTeoAsymptotic
from .registry import (FAMILIES, FamilyParams, build_family, family_summary, load_params,
                       parse_params, shipped_examples)

__all__ = [
    'ChartPoint', 'ProlateChart', 'BrillFamily', 'BrillSample',
    'EuclideanR4', 'FlatAF', 'FlatALE', 'FlatALF', 'model_for_class', 'same_class',
    'Kerr', 'ReissnerNordstrom', 'Schwarzschild',
    'ChargedTaubBolt', 'TaubBolt', 'TaubNUT',
    'EguchiHanson', 'ChenTeoAsymptotic',
    'FAMILIES', 'FamilyParams', 'build_family', 'family_summary', 'load_params',
    'parse_params', 'shipped_examples',
]
