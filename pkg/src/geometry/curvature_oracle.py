"""
Curvature Oracle

This module implements an independent check of the reduced curvature
formula. The Brill data of a sampler is assembled into the full 4-metric in
coordinates (r, theta, phi1, phi2),

    g = e^{2 alpha} J^T J (dr, dtheta) (+) G_ij dphi^i dphi^j,

with J the Jacobian of (rho, z) with respect to (r, theta). Metric
derivatives come from sympy; Christoffel symbols, their derivatives and the
Ricci scalar are then contracted numerically with einsum.
"""

import logging
from typing import Tuple

import numpy as np
import sympy

logger = logging.getLogger(__name__)

DIM = 4


def christoffel_symbols(g_inv: np.ndarray, dg: np.ndarray) -> np.ndarray:
    """
    Gamma^m_ij from the inverse metric and dg[k, i, j] = d_k g_ij

    Returns:
        np.ndarray: gamma[m, i, j]
    """
    lowered = np.einsum('ikj->kij', dg) + np.einsum('jki->kij', dg) - dg
    return 0.5 * np.einsum('mk,kij->mij', g_inv, lowered)


def christoffel_jacobian(g_inv: np.ndarray, dg: np.ndarray, d2g: np.ndarray) -> np.ndarray:
    """
    d_l Gamma^m_ij from dg[k, i, j] = d_k g_ij and d2g[l, k, i, j] = d_l d_k g_ij

    Returns:
        np.ndarray: dgamma[l, m, i, j]
    """
    lowered = np.einsum('ikj->kij', dg) + np.einsum('jki->kij', dg) - dg
    d_lowered = (np.einsum('likj->lkij', d2g) + np.einsum('ljki->lkij', d2g) - d2g)
    d_inv = -np.einsum('ma,lab,bk->lmk', g_inv, dg, g_inv)
    return 0.5 * (np.einsum('lmk,kij->lmij', d_inv, lowered)
                  + np.einsum('mk,lkij->lmij', g_inv, d_lowered))


def ricci_scalar(g: np.ndarray, dg: np.ndarray, d2g: np.ndarray) -> float:
    """
    Scalar curvature from the metric and its first and second derivatives

    Args:
        g: Metric components (4, 4)
        dg: dg[k, i, j] = d_k g_ij
        d2g: d2g[l, k, i, j] = d_l d_k g_ij

    Returns:
        float: R
    """
    g_inv = np.linalg.inv(g)
    gamma = christoffel_symbols(g_inv, dg)
    dgamma = christoffel_jacobian(g_inv, dg, d2g)
    ricci = (np.einsum('mmij->ij', dgamma)
             - np.einsum('jmim->ij', dgamma)
             + np.einsum('mmp,pij->ij', gamma, gamma)
             - np.einsum('mjp,pim->ij', gamma, gamma))
    return float(np.einsum('ij,ij->', g_inv, ricci))


class CurvatureOracle:
    """
    Scalar curvature of a sampler's full 4-metric

    The sampler must provide symbolic_metric(r, theta) returning sympy
    expressions (rho, z, e^{2 alpha}, (G11, G12, G22)).
    """

    def __init__(self, sampler, method: str = 'symbolic', step: float = 1e-4):
        if method not in ('symbolic', 'numeric'):
            raise ValueError(f"Unknown oracle method {method!r}")
        self.sampler = sampler
        self.method = method
        self.step = step

        r, theta = sympy.symbols('r theta', positive=True)
        rho, z, e2a, (g11, g12, g22) = sampler.symbolic_metric(r, theta)
        rho_r, rho_t = sympy.diff(rho, r), sympy.diff(rho, theta)
        z_r, z_t = sympy.diff(z, r), sympy.diff(z, theta)
        components = [
            e2a * (rho_r ** 2 + z_r ** 2),
            e2a * (rho_r * rho_t + z_r * z_t),
            e2a * (rho_t ** 2 + z_t ** 2),
            g11, g12, g22,
        ]

        self._values = sympy.lambdify((r, theta), components, 'numpy')
        if method == 'symbolic':
            first = [[sympy.diff(c, v) for c in components] for v in (r, theta)]
            second = [[sympy.diff(c, a, b) for c in components]
                      for a, b in ((r, r), (r, theta), (theta, theta))]
            self._first = sympy.lambdify((r, theta), first, 'numpy')
            self._second = sympy.lambdify((r, theta), second, 'numpy')
        logger.debug(f"Curvature oracle ready for {type(sampler).__name__} ({method})")

    @staticmethod
    def _assemble(values) -> np.ndarray:
        grr, grt, gtt, g11, g12, g22 = (float(v) for v in values)
        g = np.zeros((DIM, DIM))
        g[0, 0], g[0, 1], g[1, 0], g[1, 1] = grr, grt, grt, gtt
        g[2, 2], g[2, 3], g[3, 2], g[3, 3] = g11, g12, g12, g22
        return g

    def _component_derivatives(self, r: float, theta: float) -> Tuple[list, list]:
        if self.method == 'symbolic':
            return self._first(r, theta), self._second(r, theta)

        h = self.step
        f = lambda a, b: np.asarray(self._values(a, b), dtype=float)
        f0 = f(r, theta)
        d_r = (f(r - 2 * h, theta) - 8 * f(r - h, theta) + 8 * f(r + h, theta) - f(r + 2 * h, theta)) / (12 * h)
        d_t = (f(r, theta - 2 * h) - 8 * f(r, theta - h) + 8 * f(r, theta + h) - f(r, theta + 2 * h)) / (12 * h)
        d_rr = (-f(r - 2 * h, theta) + 16 * f(r - h, theta) - 30 * f0
                + 16 * f(r + h, theta) - f(r + 2 * h, theta)) / (12 * h ** 2)
        d_tt = (-f(r, theta - 2 * h) + 16 * f(r, theta - h) - 30 * f0
                + 16 * f(r, theta + h) - f(r, theta + 2 * h)) / (12 * h ** 2)
        d_rt = (f(r + h, theta + h) - f(r + h, theta - h)
                - f(r - h, theta + h) + f(r - h, theta - h)) / (4 * h ** 2)
        return [d_r, d_t], [d_rr, d_rt, d_tt]

    def metric(self, r: float, theta: float) -> np.ndarray:
        """Full 4-metric at a polar point"""
        return self._assemble(self._values(r, theta))

    def scalar_curvature(self, r: float, theta: float) -> float:
        """
        Scalar curvature at a polar point

        Args:
            r: Polar radius
            theta: Polar angle (interior)

        Returns:
            float: R
        """
        g = self.metric(r, theta)
        first, second = self._component_derivatives(r, theta)
        dg = np.zeros((DIM, DIM, DIM))
        dg[0] = self._assemble(first[0])
        dg[1] = self._assemble(first[1])
        d2g = np.zeros((DIM, DIM, DIM, DIM))
        d2g[0, 0] = self._assemble(second[0])
        d2g[0, 1] = d2g[1, 0] = self._assemble(second[1])
        d2g[1, 1] = self._assemble(second[2])
        return ricci_scalar(g, dg, d2g)

    def brill_point(self, r: float, theta: float) -> Tuple[float, float]:
        """(rho, z) of a polar point"""
        rho, z = self.sampler.coordinate_transform(r, theta)
        return float(rho), float(z)
