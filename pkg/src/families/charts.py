"""
Polar Charts

This module implements the prolate spheroidal charts that relate each
family's polar coordinates (r, theta) to the Brill half-plane (rho, z).

Every shipped chart has the form

    rho = s * sqrt(x^2 - d^2) * sin(T),    z = s * x * cos(T)

where s is a length scale, d >= 0 the half-length of the finite rod in
x-units, x a function of r and T = n * theta with n = 1 or 2. With d = 0
the chart is spherical.
"""

import logging
from dataclasses import dataclass
from typing import Any, Tuple

import numpy as np

from src import config
from src.exceptions import ConvergenceError, DomainError

logger = logging.getLogger(__name__)


@dataclass
class ChartPoint:
    """
    Polar data at Brill points

    Fields hold numpy arrays for numeric samples or sympy expressions for the
    symbolic curvature oracle. F = x^2 - d^2 and the half-angle squares are
    always stored directly so that axis limits stay accurate.
    """
    r: Any
    theta: Any
    x: Any
    F: Any  # x^2 - d^2
    sin_t: Any  # sin(T)
    cos_t: Any  # cos(T)
    c2h: Any  # cos^2(T/2)
    s2h: Any  # sin^2(T/2)


@dataclass(frozen=True)
class ProlateChart:
    """
    Chart parameters

    power = 1: x = r - center and T = theta.
    power = 2: x = r^2 / divisor and T = 2 * theta.
    """
    scale: float = 1.0
    d: float = 0.0
    center: float = 0.0
    power: int = 1
    divisor: float = 1.0

    @property
    def theta_max(self) -> float:
        return np.pi / self.power

    @property
    def r_min(self) -> float:
        """Polar radius of the rod set (x = d)"""
        return self.r_from_x(self.d)

    def x_from_r(self, r, xp=np):
        if self.power == 1:
            return r - self.center
        return r ** 2 / self.divisor

    def r_from_x(self, x, xp=np):
        if self.power == 1:
            return x + self.center
        return xp.sqrt(self.divisor * x)

    def point_from_polar(self, r, theta, xp=np) -> ChartPoint:
        """
        Chart data from polar coordinates

        Args:
            r: Polar radius (array or sympy expression)
            theta: Polar angle
            xp: numpy or sympy

        Returns:
            ChartPoint: Polar data
        """
        x = self.x_from_r(r, xp)
        t = self.power * theta
        return ChartPoint(
            r=r, theta=theta, x=x, F=x ** 2 - self.d ** 2,
            sin_t=xp.sin(t), cos_t=xp.cos(t),
            c2h=xp.cos(t / 2) ** 2, s2h=xp.sin(t / 2) ** 2,
        )

    def to_brill(self, r, theta) -> Tuple[np.ndarray, np.ndarray]:
        """
        Forward transform (r, theta) -> (rho, z)

        Args:
            r: Polar radius, at least r_min
            theta: Polar angle in [0, theta_max]

        Returns:
            tuple: (rho, z)
        """
        r = np.asarray(r, dtype=float)
        theta = np.asarray(theta, dtype=float)
        x = self.x_from_r(r)
        F = x ** 2 - self.d ** 2
        if np.any(F < 0) or (self.power == 2 and np.any(r < 0)):
            raise DomainError(f"Polar radius below the rod set r_min={self.r_min:g}")
        if np.any(theta < 0) or np.any(theta > self.theta_max + 1e-15):
            raise DomainError(f"Polar angle outside [0, {self.theta_max:g}]")
        t = self.power * theta
        rho = self.scale * np.sqrt(F) * np.sin(t)
        z = self.scale * x * np.cos(t)
        return np.abs(rho), z

    def from_brill(self, rho, z) -> ChartPoint:
        """
        Closed-form inverse (rho, z) -> polar data

        Args:
            rho: Cylindrical radius, >= 0
            z: Axial coordinate

        Returns:
            ChartPoint: Polar data with stable axis limits
        """
        rho = np.asarray(rho, dtype=float)
        z = np.asarray(z, dtype=float)
        rho, z = np.broadcast_arrays(rho, z)
        if np.any(rho < 0):
            raise DomainError("Brill points need rho >= 0")
        rp = rho / self.scale
        zp = z / self.scale

        def dist(a):
            return np.hypot(rp, a)

        def excess(a):
            # R(a) - a without cancellation
            radius = dist(a)
            with np.errstate(divide='ignore', invalid='ignore'):
                positive = rp ** 2 / (radius + a)
            return np.where(a > 0, positive, radius - a)

        if self.d == 0.0:
            radius = dist(zp)
            if np.any(radius == 0):
                raise DomainError("The chart is singular at the corner point rho = z = 0")
            x = radius
            F = radius ** 2
            sin_t = rp / radius
            c2h = excess(-zp) / (2 * radius)
            s2h = excess(zp) / (2 * radius)
        else:
            d = self.d
            r1 = dist(zp + d)
            r2 = dist(zp - d)
            x = 0.5 * (r1 + r2)
            gap = excess(zp + d) + excess(d - zp)  # r1 + r2 - 2d
            F = gap * (r1 + r2 + 2 * d) / 4.0
            a = excess(zp - d) - excess(zp + d)  # 2d (1 - cos T)
            b = excess(-zp - d) - excess(d - zp)  # 2d (1 + cos T)
            a = np.maximum(a, 0.0)
            b = np.maximum(b, 0.0)
            c2h = b / (4 * d)
            s2h = a / (4 * d)
            sin_t = np.sqrt(a * b) / (2 * d)

        cos_t = c2h - s2h
        t = np.arctan2(sin_t, cos_t)
        r = self.r_from_x(x)
        return ChartPoint(r=r, theta=t / self.power, x=x, F=F,
                          sin_t=sin_t, cos_t=cos_t, c2h=c2h, s2h=s2h)

    def from_brill_newton(self, rho, z, tol: float = config.NEWTON_TOL,
                          max_iter: int = config.NEWTON_MAX_ITER) -> ChartPoint:
        """
        Safeguarded Newton inverse of to_brill, seeded with the spherical guess

        Args:
            rho: Cylindrical radius (interior points, rho > 0)
            z: Axial coordinate
            tol: Relative tolerance on the residual
            max_iter: Iteration cap

        Returns:
            ChartPoint: Polar data
        """
        rho = np.atleast_1d(np.asarray(rho, dtype=float))
        z = np.atleast_1d(np.asarray(z, dtype=float))
        rho, z = np.broadcast_arrays(rho, z)
        rp = rho / self.scale
        zp = z / self.scale

        # spherical guess in (x, T)
        x = np.maximum(np.hypot(rp, zp), self.d * (1 + 1e-6) + 1e-12)
        t = np.arctan2(rp, zp)
        d2 = self.d ** 2

        def residual(x, t):
            return np.sqrt(np.maximum(x ** 2 - d2, 0.0)) * np.sin(t) - rp, x * np.cos(t) - zp

        f1, f2 = residual(x, t)
        norm = np.hypot(f1, f2)
        scale = np.maximum(np.hypot(rp, zp), 1.0)
        for iteration in range(max_iter):
            if np.all(norm <= tol * scale):
                break
            root = np.sqrt(np.maximum(x ** 2 - d2, 1e-300))
            j11 = x * np.sin(t) / root
            j12 = root * np.cos(t)
            j21 = np.cos(t)
            j22 = -x * np.sin(t)
            det = j11 * j22 - j12 * j21
            with np.errstate(divide='ignore', invalid='ignore'):
                dx = (-f1 * j22 + f2 * j12) / det
                dt = (-j11 * f2 + j21 * f1) / det
            dx = np.where(np.isfinite(dx), dx, 0.0)
            dt = np.where(np.isfinite(dt), dt, 0.0)

            step = np.ones_like(x)
            for _ in range(30):
                x_new = np.maximum(x + step * dx, self.d + 1e-300)
                t_new = np.clip(t + step * dt, 0.0, np.pi)
                g1, g2 = residual(x_new, t_new)
                better = np.hypot(g1, g2) < norm
                if np.all(better | (norm <= tol * scale)):
                    break
                step = np.where(better, step, 0.5 * step)
            x, t = x_new, t_new
            f1, f2 = g1, g2
            norm = np.hypot(f1, f2)
        else:
            if not np.all(norm <= tol * scale):
                raise ConvergenceError(
                    f"Chart inversion did not converge in {max_iter} iterations",
                    {'max_residual': float(np.max(norm / scale))})

        logger.debug(f"Newton chart inversion converged, max residual {float(np.max(norm)):.3e}")
        return self.point_from_polar(self.r_from_x(x), t / self.power)


def half_angle_squares(cos_t, sin_t) -> Tuple[np.ndarray, np.ndarray]:
    """Stable cos^2(T/2) and sin^2(T/2) from cos(T) and sin(T)"""
    cos_t = np.asarray(cos_t, dtype=float)
    sin_t = np.asarray(sin_t, dtype=float)
    with np.errstate(divide='ignore', invalid='ignore'):
        c_pos = 0.5 * (1 + cos_t)
        s_pos = np.where(cos_t > -1, sin_t ** 2 / (2 * (1 + cos_t)), 1.0)
        c_neg = np.where(cos_t < 1, sin_t ** 2 / (2 * (1 - cos_t)), 1.0)
        s_neg = 0.5 * (1 - cos_t)
    return np.where(cos_t >= 0, c_pos, c_neg), np.where(cos_t >= 0, s_pos, s_neg)
