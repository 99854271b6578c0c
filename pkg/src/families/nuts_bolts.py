"""
Taub-NUT and Taub-Bolt Instantons

This module implements the ALF families with k = 1: Taub-NUT, the
charged Taub-Bolt family and Taub-Bolt as its Ricci-flat member.
"""

import logging
import math
from typing import Any, Dict, List

import numpy as np

from src.families.base import BrillFamily, TorusTerm, make_rods, require
from src.families.charts import ChartPoint, ProlateChart
from src.families.models import FlatALF
from src.rods import AsymptoticClass, RodDataSet

logger = logging.getLogger(__name__)


class TaubNUT(FlatALF):
    """
    Taub-NUT with circle length ell

    The h-modified ALF model with k = 1 and beta = 0: h = 1 + ell/(2r) and
    mass pi ell^2. The nut sits at the origin of the Brill half-plane.
    """

    key = 'taub-nut'

    def __init__(self, ell: float):
        super().__init__(1, ell, 0.0, h_modified=True)

    def params(self) -> Dict[str, float]:
        return {'ell': self.ell}

    def rod_data(self) -> RodDataSet:
        return make_rods([(1, 0), (1, -1)], [0.0])


class ChargedTaubBolt(BrillFamily):
    """
    Charged Taub-Bolt with bolt radius r_plus and circle length ell

    F = (r - r_plus)(r - r_minus) with r_minus = r_plus + ell/8 - 2 r_plus^2/ell.
    The chart is prolate with scale ell, center c = r_plus + ell/16 - r_plus^2/ell
    and d = r_plus^2/ell - ell/16; with K = r^2 - ell^2/16,
    G = (ell^2 F / K) (cos^2(theta/2), 1)^2 + K sin^2 theta (1, 0)^2.
    """

    key = 'charged-taub-bolt'
    ricci_flat = False

    def __init__(self, r_plus: float, ell: float):
        require(ell > 0, f"Charged Taub-Bolt needs ell > 0, got {ell}")
        require(r_plus > ell / 4, f"Charged Taub-Bolt needs r_plus > ell/4, got r_plus={r_plus}, ell={ell}")
        self.r_plus = float(r_plus)
        self.ell = float(ell)
        self.center = self.r_plus + self.ell / 16 - self.r_plus ** 2 / self.ell
        self.d = self.r_plus ** 2 / self.ell - self.ell / 16
        self.r_minus = self.r_plus + self.ell / 8 - 2 * self.r_plus ** 2 / self.ell
        self.ricci_flat = math.isclose(self.r_plus, self.ell / 2)
        self.chart = ProlateChart(scale=self.ell, d=self.d, center=self.center)

    def params(self) -> Dict[str, float]:
        return {'r_plus': self.r_plus, 'ell': self.ell}

    def derived(self) -> Dict[str, Any]:
        out = super().derived()
        out.update({'r_minus': self.r_minus, 'c': self.center})
        return out

    def torus_terms(self, pt: ChartPoint, xp=np) -> List[TorusTerm]:
        K = pt.r ** 2 - self.ell ** 2 / 16
        return [
            (self.ell ** 2 * pt.F / K, pt.c2h, 1),
            (K * pt.sin_t ** 2, 1, 0),
        ]

    def conformal_factor(self, pt: ChartPoint, xp=np):
        K = pt.r ** 2 - self.ell ** 2 / 16
        return K / (self.ell ** 2 * (pt.F + self.d ** 2 * pt.sin_t ** 2))

    def asymptotic_class(self) -> AsymptoticClass:
        return AsymptoticClass.alf(1, self.ell)

    def rod_data(self) -> RodDataSet:
        z = self.ell * self.d
        return make_rods([(1, 0), (0, 1), (1, -1)], [-z, z])

    def exact_mass(self) -> float:
        return 4 * math.pi * self.ell * self.center

    def model(self) -> BrillFamily:
        return FlatALF(1, self.ell)


class TaubBolt(ChargedTaubBolt):
    """Taub-Bolt: the Ricci-flat member r_plus = ell/2, mass 5 pi ell^2 / 4"""

    key = 'taub-bolt'

    def __init__(self, ell: float):
        require(ell > 0, f"Taub-Bolt needs ell > 0, got {ell}")
        super().__init__(ell / 2, ell)
        self.ricci_flat = True

    def params(self) -> Dict[str, float]:
        return {'ell': self.ell}
