"""
Flat Model Geometries

This module implements the asymptotic model metrics b_ALE, b_ALF and b_AF,
the Euclidean 4-space and the h-modified ALF model.
"""

import logging
import math
from typing import Any, Dict, List

import numpy as np

from src.families.base import BrillFamily, TorusTerm, make_rods, require
from src.families.charts import ChartPoint, ProlateChart
from src.rods import AsymptoticClass, RodDataSet

logger = logging.getLogger(__name__)


class FlatAF(BrillFamily):
    """
    AF model: dr^2 + r^2 (dtheta^2 + sin^2 theta dphi1^2) twisted by beta

    G = r^2 sin^2 theta (1, beta ell)^2 + ell^2 (0, 1)^2 and e^{2 alpha} = ell^-2.
    """

    key = 'flat-af'

    def __init__(self, beta: float = 0.0, ell: float = 1.0):
        require(ell > 0, f"FlatAF needs ell > 0, got {ell}")
        self.beta = float(beta)
        self.ell = float(ell)
        self.chart = ProlateChart(scale=self.ell)

    def params(self) -> Dict[str, float]:
        return {'beta': self.beta, 'ell': self.ell}

    def torus_terms(self, pt: ChartPoint, xp=np) -> List[TorusTerm]:
        return [
            (pt.r ** 2 * pt.sin_t ** 2, 1, self.beta * self.ell),
            (self.ell ** 2, 0, 1),
        ]

    def conformal_factor(self, pt: ChartPoint, xp=np):
        return pt.r * 0 + 1 / self.ell ** 2

    def asymptotic_class(self) -> AsymptoticClass:
        return AsymptoticClass.af(self.beta, self.ell)

    def rod_data(self) -> RodDataSet:
        return make_rods([(1, 0)])

    def exact_mass(self) -> float:
        return 0.0

    def model(self) -> BrillFamily:
        return self


class FlatALF(BrillFamily):
    """
    ALF model with Chern number k

    G = h^-1 ell^2 w (x) w + h r^2 sin^2 theta Psi (x) Psi with
    w = (k cos^2(theta/2), 1 + k beta ell cos^2(theta/2)), Psi = (1, beta ell)
    and e^{2 alpha} = h / ell^2. The unmodified model has h = 1; the
    h-modified one has h = 1 + k ell / (2r), which is Ricci-flat and equals
    Taub-NUT for k = 1.
    """

    key = 'flat-alf'

    def __init__(self, k: int = 1, ell: float = 1.0, beta: float = 0.0, h_modified: bool = False):
        require(int(k) == k and k >= 1, f"FlatALF needs an integer k >= 1, got {k}")
        require(ell > 0, f"FlatALF needs ell > 0, got {ell}")
        self.k = int(k)
        self.ell = float(ell)
        self.beta = float(beta)
        self.h_modified = bool(h_modified)
        self.ricci_flat = self.h_modified
        self.scalar_flat = self.h_modified
        self.chart = ProlateChart(scale=self.ell)
        # raises DomainError unless 1 + k beta ell is an integer
        self.asymptotic_class().end_structures()

    def params(self) -> Dict[str, Any]:
        return {'k': self.k, 'ell': self.ell, 'beta': self.beta, 'h_modified': self.h_modified}

    def h(self, r):
        if not self.h_modified:
            return r * 0 + 1
        return 1 + self.k * self.ell / (2 * r)

    def torus_terms(self, pt: ChartPoint, xp=np) -> List[TorusTerm]:
        h = self.h(pt.r)
        beta_ell = self.beta * self.ell
        return [
            (self.ell ** 2 / h, self.k * pt.c2h, 1 + self.k * beta_ell * pt.c2h),
            (h * pt.r ** 2 * pt.sin_t ** 2, 1, beta_ell),
        ]

    def conformal_factor(self, pt: ChartPoint, xp=np):
        return self.h(pt.r) / self.ell ** 2

    def asymptotic_class(self) -> AsymptoticClass:
        return AsymptoticClass.alf(self.k, self.ell, self.beta)

    def rod_data(self) -> RodDataSet:
        first, last = self.asymptotic_class().end_structures()
        return make_rods([first.as_tuple(), last.as_tuple()], [0.0])

    def exact_mass(self) -> float:
        return math.pi * self.k * self.ell ** 2 if self.h_modified else 0.0

    def model(self) -> BrillFamily:
        if not self.h_modified:
            return self
        return FlatALF(self.k, self.ell, self.beta)


class FlatALE(BrillFamily):
    """
    ALE model on C^2 / Z_p

    In the Hopf chart with R = r^2 / (2p) and T = 2 theta,
    G = r^2 cos^2 theta (q/p, 1)^2 + (r^2 sin^2 theta / p^2) (1, 0)^2
    and e^{2 alpha} = p^2 / r^2.
    """

    key = 'flat-ale'

    def __init__(self, p: int = 1, q: int = 0):
        require(int(p) == p and p >= 1, f"FlatALE needs an integer p >= 1, got {p}")
        require(int(q) == q and math.gcd(int(p), abs(int(q))) == 1,
                f"FlatALE needs gcd(p, q) = 1, got p={p}, q={q}")
        self.p = int(p)
        self.q = int(q)
        self.chart = ProlateChart(power=2, divisor=2.0 * self.p)

    def params(self) -> Dict[str, float]:
        return {'p': self.p, 'q': self.q}

    def torus_terms(self, pt: ChartPoint, xp=np) -> List[TorusTerm]:
        # r^2 = 2 p R, cos^2 theta = cos^2(T/2), sin^2 theta = sin^2(T/2)
        radius = pt.x
        return [
            (2 * self.p * radius * pt.c2h, self.q / self.p, 1),
            (2 * radius * pt.s2h / self.p, 1, 0),
        ]

    def conformal_factor(self, pt: ChartPoint, xp=np):
        return self.p / (2 * pt.x)

    def asymptotic_class(self) -> AsymptoticClass:
        return AsymptoticClass.ale(self.p, self.q)

    def rod_data(self) -> RodDataSet:
        return make_rods([(0, 1), (self.p, -self.q)], [0.0])

    def exact_mass(self) -> float:
        return 0.0

    def model(self) -> BrillFamily:
        return self

    def derived(self) -> Dict[str, Any]:
        return {'turning_points': [0.0], 'asymptotic_class': self.asymptotic_class().label()}


class EuclideanR4(FlatALE):
    """Flat R^4: G = diag(R - z, R + z), e^{2 alpha} = 1 / (2R)"""

    key = 'euclidean'

    def __init__(self):
        super().__init__(1, 0)

    def params(self) -> Dict[str, float]:
        return {}


def model_for_class(cls: AsymptoticClass) -> BrillFamily:
    """Flat model geometry of an asymptotic class"""
    if cls.tag == 'ALE':
        return FlatALE(cls.p, cls.q)
    if cls.tag == 'ALF':
        return FlatALF(cls.k, cls.ell, cls.beta)
    return FlatAF(cls.beta, cls.ell)


def same_class(a: AsymptoticClass, b: AsymptoticClass, tol: float = 1e-12) -> bool:
    """True when two classes share their tag and moduli"""
    if a.tag != b.tag:
        return False
    if a.tag == 'ALE':
        return (a.p, a.q) == (b.p, b.q)
    close = (math.isclose(a.ell, b.ell, rel_tol=tol)
             and math.isclose(a.beta * a.ell, b.beta * b.ell, rel_tol=tol, abs_tol=tol))
    return close and (a.tag == 'AF' or a.k == b.k)
