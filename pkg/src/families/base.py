"""
Brill Family Base

This module implements the common machinery of the closed-form geometries:
Brill samples, torus matrices assembled from rank-one terms, torus norms,
chart inversion and the symbolic form consumed by the curvature oracle.

A family writes its metric as

    g = e^{2 alpha} (d rho^2 + dz^2) + G_ij dphi^i dphi^j,
    G = sum_k c_k w_k (x) w_k,

with c_k >= 0 scalar fields and w_k covectors on the torus. Keeping the
terms separate lets G(v, v) = sum_k c_k (w_k . v)^2 be evaluated without
cancellation on the axis.
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.exceptions import DomainError
from src.families.charts import ChartPoint, ProlateChart
from src.rods import AsymptoticClass, RodDataSet

logger = logging.getLogger(__name__)

# (coefficient, w1, w2)
TorusTerm = Tuple[Any, Any, Any]


@dataclass
class BrillSample:
    """Metric data at points of the Brill half-plane"""
    rho: np.ndarray
    z: np.ndarray
    alpha: np.ndarray
    G: np.ndarray  # (..., 2, 2)
    A: np.ndarray  # (..., 2, 2), connection coefficients A^i_a

    @property
    def det_G(self) -> np.ndarray:
        return self.G[..., 0, 0] * self.G[..., 1, 1] - self.G[..., 0, 1] ** 2

    @property
    def Z(self) -> np.ndarray:
        return 0.5 * np.log(self.det_G) - np.log(self.rho)


class BrillFamily:
    """
    Base class of the closed-form geometries

    Subclasses set `chart` in their constructor and implement torus_terms,
    conformal_factor, asymptotic_class, rod_data and exact_mass.
    """

    key = ''
    ricci_flat = True
    scalar_flat = True
    smooth_axis = True  # Brill data even in rho near the axis
    chart: ProlateChart

    def params(self) -> Dict[str, float]:
        """Constructor parameters by name"""
        raise NotImplementedError

    def derived(self) -> Dict[str, Any]:
        """Derived constants echoed by the command line"""
        cls = self.asymptotic_class()
        return {
            'ell': cls.ell if cls.tag != 'ALE' else None,
            'beta': cls.beta if cls.tag != 'ALE' else None,
            'turning_points': list(self.rod_data().turning_points),
            'asymptotic_class': cls.label(),
        }

    def torus_terms(self, pt: ChartPoint, xp=np) -> List[TorusTerm]:
        raise NotImplementedError

    def conformal_factor(self, pt: ChartPoint, xp=np):
        """e^{2 alpha} at a chart point"""
        raise NotImplementedError

    def asymptotic_class(self) -> AsymptoticClass:
        raise NotImplementedError

    def rod_data(self) -> RodDataSet:
        raise NotImplementedError

    def exact_mass(self) -> float:
        raise NotImplementedError

    def model(self) -> 'BrillFamily':
        """Flat model geometry of the end"""
        raise NotImplementedError

    @property
    def beta_ell(self) -> float:
        return self.asymptotic_class().beta_ell

    def label(self) -> str:
        args = ", ".join(f"{k}={v:g}" for k, v in self.params().items() if isinstance(v, (int, float)))
        return f"{type(self).__name__}({args})"

    # Charts

    def coordinate_transform(self, r, theta) -> Tuple[np.ndarray, np.ndarray]:
        """
        Polar coordinates to Brill coordinates

        Args:
            r: Polar radius (array)
            theta: Polar angle (array)

        Returns:
            tuple: (rho, z)
        """
        return self.chart.to_brill(r, theta)

    def polar_point(self, rho, z, method: str = 'closed') -> ChartPoint:
        """Invert the chart with the closed form or the generic Newton iteration"""
        if method == 'newton':
            return self.chart.from_brill_newton(rho, z)
        return self.chart.from_brill(rho, z)

    # Samplers

    def torus_matrix_at(self, pt: ChartPoint, xp=np):
        """Torus matrix entries (G11, G12, G22) at a chart point"""
        g11 = g12 = g22 = 0
        for c, w1, w2 in self.torus_terms(pt, xp):
            g11 = g11 + c * w1 * w1
            g12 = g12 + c * w1 * w2
            g22 = g22 + c * w2 * w2
        return g11, g12, g22

    def sample_brill(self, rho, z, method: str = 'closed') -> BrillSample:
        """
        Evaluate alpha, G and A at Brill points

        Args:
            rho: Cylindrical radius samples (rho >= 0)
            z: Axial samples
            method: 'closed' or 'newton' chart inversion

        Returns:
            BrillSample: Metric data broadcast to the common shape
        """
        rho = np.asarray(rho, dtype=float)
        z = np.asarray(z, dtype=float)
        rho, z = np.broadcast_arrays(rho, z)
        pt = self.polar_point(rho, z, method)
        g11, g12, g22 = (np.broadcast_to(np.asarray(g, dtype=float), rho.shape)
                         for g in self.torus_matrix_at(pt))
        G = np.stack([np.stack([g11, g12], axis=-1), np.stack([g12, g22], axis=-1)], axis=-2)
        e2a = np.broadcast_to(np.asarray(self.conformal_factor(pt), dtype=float), rho.shape)
        with np.errstate(divide='ignore'):
            alpha = 0.5 * np.log(e2a)
        return BrillSample(rho=rho, z=z, alpha=alpha, G=G, A=np.zeros(rho.shape + (2, 2)))

    def torus_matrix(self, rho, z) -> np.ndarray:
        return self.sample_brill(rho, z).G

    def alpha(self, rho, z) -> np.ndarray:
        pt = self.polar_point(rho, z)
        with np.errstate(divide='ignore'):
            return 0.5 * np.log(np.asarray(self.conformal_factor(pt), dtype=float))

    def torus_norm(self, v: Sequence[float], rho, z) -> np.ndarray:
        """
        G(v, v) at Brill points

        Args:
            v: Torus vector (rod structure components)
            rho: Cylindrical radius samples
            z: Axial samples

        Returns:
            np.ndarray: Norm squared of v, accurate where G degenerates
        """
        pt = self.polar_point(rho, z)
        total = 0.0
        for c, w1, w2 in self.torus_terms(pt):
            total = total + c * (w1 * v[0] + w2 * v[1]) ** 2
        return np.asarray(total, dtype=float)

    def symbolic_metric(self, r, theta):
        """
        Symbolic Brill data in polar coordinates

        Args:
            r: sympy symbol for the polar radius
            theta: sympy symbol for the polar angle

        Returns:
            tuple: (rho, z, e^{2 alpha}, (G11, G12, G22)) as sympy expressions
        """
        import sympy

        pt = self.chart.point_from_polar(r, theta, xp=sympy)
        rho = self.chart.scale * sympy.sqrt(pt.F) * pt.sin_t
        z = self.chart.scale * pt.x * pt.cos_t
        return rho, z, self.conformal_factor(pt, xp=sympy), self.torus_matrix_at(pt, xp=sympy)


def require(condition: bool, message: str) -> None:
    """Raise DomainError unless a parameter invariant holds"""
    if not condition:
        raise DomainError(message)


def spherical_chart(scale: float) -> ProlateChart:
    return ProlateChart(scale=scale)


def make_rods(pairs: Sequence[Tuple[int, int]], turning_points: Optional[Sequence[float]] = None) -> RodDataSet:
    return RodDataSet.from_pairs(pairs, turning_points or ())
