"""
Kerr and Reissner-Nordstrom Instantons

This module implements the AF families with a finite bolt rod: the Riemannian
Kerr instantons, the scalar-flat Reissner-Nordstrom family and its
Schwarzschild specialization.
"""

import logging
import math
from typing import Any, Dict, List, Optional

import numpy as np

from src.families.base import BrillFamily, TorusTerm, make_rods, require
from src.families.charts import ChartPoint, ProlateChart
from src.families.models import FlatAF
from src.rods import AsymptoticClass, RodDataSet

logger = logging.getLogger(__name__)


class Kerr(BrillFamily):
    """
    Riemannian Kerr instanton with horizon radius r_plus and rotation a

    With M = (r_plus^2 - a^2) / (2 r_plus), beta = a / (r_plus^2 - a^2) and
    ell = 2 r_plus (r_plus^2 - a^2) / (r_plus^2 + a^2) the metric is regular.
    The chart is prolate with scale ell, center M and d = r_plus - M.
    """

    key = 'kerr'

    def __init__(self, r_plus: float, a: float = 0.0):
        require(r_plus > a >= 0, f"Kerr needs r_plus > a >= 0, got r_plus={r_plus}, a={a}")
        self.r_plus = float(r_plus)
        self.a = float(a)
        rp2, a2 = self.r_plus ** 2, self.a ** 2
        self.M = (rp2 - a2) / (2 * self.r_plus)
        self.beta = self.a / (rp2 - a2)
        self.ell = 2 * self.r_plus * (rp2 - a2) / (rp2 + a2)
        self.d = self.r_plus - self.M
        self.chart = ProlateChart(scale=self.ell, d=self.d, center=self.M)

    def params(self) -> Dict[str, float]:
        return {'r_plus': self.r_plus, 'a': self.a}

    def derived(self) -> Dict[str, Any]:
        out = super().derived()
        out['M'] = self.M
        return out

    def torus_terms(self, pt: ChartPoint, xp=np) -> List[TorusTerm]:
        a, ell, beta = self.a, self.ell, self.beta
        r2 = pt.r ** 2
        s2 = pt.sin_t ** 2
        sigma = r2 - a ** 2 * pt.cos_t ** 2
        return [
            (ell ** 2 * pt.F / sigma, a * s2 / ell, 1 + a * beta * s2),
            (s2 / sigma, r2 - a ** 2, (r2 - a ** 2) * beta * ell - a * ell),
        ]

    def conformal_factor(self, pt: ChartPoint, xp=np):
        sigma = pt.r ** 2 - self.a ** 2 * pt.cos_t ** 2
        return sigma / (self.ell ** 2 * (pt.F + self.d ** 2 * pt.sin_t ** 2))

    def asymptotic_class(self) -> AsymptoticClass:
        return AsymptoticClass.af(self.beta, self.ell)

    def rod_data(self) -> RodDataSet:
        z = self.ell * self.d
        return make_rods([(1, 0), (0, 1), (1, 0)], [-z, z])

    def exact_mass(self) -> float:
        """4 pi M ell, checked against 4 pi (r_plus^2 - a^2)^2 / (r_plus^2 + a^2)"""
        mass = 4 * math.pi * self.M * self.ell
        rp2, a2 = self.r_plus ** 2, self.a ** 2
        closed = 4 * math.pi * (rp2 - a2) ** 2 / (rp2 + a2)
        if not math.isclose(mass, closed, rel_tol=1e-12):
            raise ArithmeticError(f"Kerr mass forms disagree: {mass} vs {closed}")
        return mass

    def model(self) -> BrillFamily:
        return FlatAF(self.beta, self.ell)


class ReissnerNordstrom(BrillFamily):
    """
    Scalar-flat Reissner-Nordstrom instanton

    M = (r_plus^2 + c1) / (2 r_plus) and d = sqrt(M^2 - c1). The regular
    period is ell = r_plus^2 / d; any other ell leaves a conical
    singularity on the bolt rod with defect log(r_plus^2 / (ell d)).
    """

    key = 'reissner-nordstrom'
    ricci_flat = False

    def __init__(self, r_plus: float, c1: float = 0.0, ell: Optional[float] = None):
        require(r_plus > 0, f"Reissner-Nordstrom needs r_plus > 0, got {r_plus}")
        require(r_plus ** 2 > c1, f"Reissner-Nordstrom needs r_plus^2 > c1, got r_plus={r_plus}, c1={c1}")
        self.r_plus = float(r_plus)
        self.c1 = float(c1)
        self.M = (self.r_plus ** 2 + self.c1) / (2 * self.r_plus)
        self.d = (self.r_plus ** 2 - self.c1) / (2 * self.r_plus)
        self.regular_ell = self.r_plus ** 2 / self.d
        if ell is not None:
            require(ell > 0, f"Reissner-Nordstrom needs ell > 0, got {ell}")
        self.ell = float(ell) if ell is not None else self.regular_ell
        self.ricci_flat = self.c1 == 0
        self.chart = ProlateChart(scale=self.ell, d=self.d, center=self.M)

    @classmethod
    def from_mass(cls, M: float, c1: float, ell: Optional[float] = None) -> 'ReissnerNordstrom':
        """Family with mass parameter M, r_plus = M + sqrt(M^2 - c1)"""
        require(c1 <= M ** 2, f"Reissner-Nordstrom needs c1 <= M^2, got M={M}, c1={c1}")
        return cls(M + math.sqrt(M ** 2 - c1), c1, ell)

    def params(self) -> Dict[str, Any]:
        return {'r_plus': self.r_plus, 'c1': self.c1, 'ell': self.ell}

    def derived(self) -> Dict[str, Any]:
        out = super().derived()
        out.update({'M': self.M, 'regular_ell': self.regular_ell, 'bolt_defect': self.bolt_defect()})
        return out

    def bolt_defect(self) -> float:
        """Logarithmic angle defect on the bolt rod"""
        return math.log(self.r_plus ** 2 / (self.ell * self.d))

    def torus_terms(self, pt: ChartPoint, xp=np) -> List[TorusTerm]:
        return [
            (pt.r ** 2 * pt.sin_t ** 2, 1, 0),
            (self.ell ** 2 * pt.F / pt.r ** 2, 0, 1),
        ]

    def conformal_factor(self, pt: ChartPoint, xp=np):
        return pt.r ** 2 / (self.ell ** 2 * (pt.F + self.d ** 2 * pt.sin_t ** 2))

    def asymptotic_class(self) -> AsymptoticClass:
        return AsymptoticClass.af(0.0, self.ell)

    def rod_data(self) -> RodDataSet:
        z = self.ell * self.d
        return make_rods([(1, 0), (0, 1), (1, 0)], [-z, z])

    def exact_mass(self) -> float:
        return 4 * math.pi * self.M * self.ell

    def model(self) -> BrillFamily:
        return FlatAF(0.0, self.ell)


class Schwarzschild(ReissnerNordstrom):
    """Schwarzschild instanton: r_plus = 2M, c1 = 0, regular ell = 4M"""

    key = 'schwarzschild'

    def __init__(self, M: float, ell: Optional[float] = None):
        require(M > 0, f"Schwarzschild needs M > 0, got {M}")
        super().__init__(2 * M, 0.0, ell)

    def params(self) -> Dict[str, Any]:
        return {'M': self.M, 'ell': self.ell}
