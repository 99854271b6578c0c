"""
Corner Fluxes

This module implements the X flux through small half-circles around a
turning point z_n of the Brill half-plane. In the corner chart

    rho = (s^2 / 2) sin 2 theta,    z = z_n + (s^2 / 2) cos 2 theta,

d rho^2 + dz^2 = s^2 (ds^2 + s^2 dtheta^2), so the flux of X(nu) over the
level set s is 2 pi int X(d_s) s rho e^{Z_o} dtheta, normalized as the
fluxes at infinity.
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from src import config
from src.exceptions import ClassMismatchError, DomainError
from src.mass.integrands import radial_sample, reduced_fields, x_flux_density
from src.utils.numerics import gauss_legendre

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CornerChart:
    """Polar chart centred on a turning point"""
    z_corner: float

    def coordinate_transform(self, s, theta) -> Tuple[np.ndarray, np.ndarray]:
        half = 0.5 * np.asarray(s, dtype=float) ** 2
        theta = np.asarray(theta, dtype=float)
        return half * np.sin(2 * theta), self.z_corner + half * np.cos(2 * theta)


def _corner(g, g_o, corner_index: int) -> Tuple[float, float]:
    points = list(g.rod_data().turning_points)
    points_o = list(g_o.rod_data().turning_points)
    if not 1 <= corner_index <= len(points):
        raise DomainError(f"Corner index {corner_index} outside 1..{len(points)}")
    if not g.rod_data().same_rods(g_o.rod_data(), tol=1e-12):
        raise ClassMismatchError(f"{g.label()} and {g_o.label()} do not share their rod data")
    z_n = points[corner_index - 1]
    others = [abs(z - z_n) for z in points + points_o if abs(z - z_n) > 1e-12]
    return z_n, min(others) if others else math.inf


def corner_flux(g, g_o, corner_index: int, radius: float,
                quad_points: int = config.MASS_QUAD_POINTS) -> float:
    """
    Flux of X(nu) through the corner half-circle of the given radius

    Args:
        g: Geometry
        g_o: Reference geometry with the same rod data
        corner_index: 1-based turning point index
        radius: Corner chart radius s; the Brill radius is s^2 / 2
        quad_points: Gauss-Legendre nodes in theta

    Returns:
        float: The flux; tends to 0 as the radius shrinks
    """
    z_n, gap = _corner(g, g_o, corner_index)
    if radius <= 0 or 0.5 * radius ** 2 >= 0.5 * gap:
        raise DomainError(f"Corner ball of radius {radius:g} around z={z_n:g} reaches the next turning point")
    chart = CornerChart(z_n)
    # the twist of g fixes the Fermi branch for both samples
    cls = g.asymptotic_class()
    theta, weights = gauss_legendre(quad_points, 0.0, 0.5 * math.pi)
    s_g = radial_sample(g, chart, cls, radius, theta)
    s_o = radial_sample(g_o, chart, cls, radius, theta)
    density = x_flux_density(s_g, s_o)
    Z_o = reduced_fields(s_o)[0]
    value = 2 * math.pi * config.TORUS_NORMALIZATION * float(
        np.sum(weights * density * radius * s_o.rho * np.exp(Z_o)))
    logger.debug(f"Corner {corner_index} flux at s={radius:g}: {value:.6e}")
    return value


def corner_flux_sequence(g, g_o, corner_index: int,
                         radii: Sequence[float] = (0.1, 0.05, 0.025)) -> List[float]:
    """Corner fluxes over shrinking radii"""
    return [corner_flux(g, g_o, corner_index, s) for s in radii]
