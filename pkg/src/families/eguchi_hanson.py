"""
Eguchi-Hanson Instanton
"""

import logging
from typing import List

import numpy as np

from src.families.base import BrillFamily, TorusTerm, make_rods, require
from src.families.charts import ChartPoint, ProlateChart
from src.families.models import FlatALE
from src.rods import AsymptoticClass, RodDataSet

logger = logging.getLogger(__name__)


class EguchiHanson(BrillFamily):
    """
    Eguchi-Hanson metric with bolt parameter a

    With u = r^2/4 and T = 2 theta the chart is prolate with d = a^2/4, and
    G = (F/u) (1, 2 cos^2 theta)^2 + u sin^2 T (0, 1)^2, e^{2 alpha} = u / (F + d^2 sin^2 T).
    """

    key = 'eguchi-hanson'

    def __init__(self, a: float):
        require(a > 0, f"Eguchi-Hanson needs a > 0, got {a}")
        self.a = float(a)
        self.d = self.a ** 2 / 4
        self.chart = ProlateChart(d=self.d, power=2, divisor=4.0)

    def params(self):
        return {'a': self.a}

    def derived(self):
        return {'turning_points': list(self.rod_data().turning_points),
                'asymptotic_class': self.asymptotic_class().label()}

    def torus_terms(self, pt: ChartPoint, xp=np) -> List[TorusTerm]:
        u = pt.x
        return [
            (pt.F / u, 1, 2 * pt.c2h),
            (u * pt.sin_t ** 2, 0, 1),
        ]

    def conformal_factor(self, pt: ChartPoint, xp=np):
        return pt.x / (pt.F + self.d ** 2 * pt.sin_t ** 2)

    def asymptotic_class(self) -> AsymptoticClass:
        return AsymptoticClass.ale(2, 1)

    def rod_data(self) -> RodDataSet:
        return make_rods([(0, 1), (1, 0), (2, -1)], [-self.d, self.d])

    def exact_mass(self) -> float:
        return 0.0

    def model(self) -> BrillFamily:
        return FlatALE(2, 1)
