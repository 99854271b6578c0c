"""
Numeric helpers

This module implements the finite difference stencils, Richardson
extrapolation, Gauss-Legendre rules and decay fits shared by the engines.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Sequence, Tuple

import numpy as np
from scipy import optimize, special

from src import config

logger = logging.getLogger(__name__)


@dataclass
class Derivatives2D:
    """Value and first/second partial derivatives of a field on the half-plane"""
    value: np.ndarray
    d_rho: np.ndarray
    d_z: np.ndarray
    d_rho_rho: np.ndarray
    d_zz: np.ndarray

    @property
    def laplacian_2d(self) -> np.ndarray:
        return self.d_rho_rho + self.d_zz


def default_step(rho) -> np.ndarray:
    """Finite difference step that shrinks toward the axis"""
    rho = np.asarray(rho, dtype=float)
    return np.maximum(config.FD_MIN_STEP, config.FD_REL_STEP * rho)


def _expand(h: np.ndarray, target: np.ndarray) -> np.ndarray:
    """Broadcast a step array against matrix-valued samples"""
    extra = target.ndim - h.ndim
    return h.reshape(h.shape + (1,) * extra) if extra > 0 else h


def derivatives_2d(func: Callable[[np.ndarray, np.ndarray], np.ndarray],
                   rho, z, h=None, order: int = config.FD_ORDER) -> Derivatives2D:
    """
    Centered finite differences of a vectorized field f(rho, z)

    Args:
        func: Vectorized field; may return trailing matrix dimensions
        rho: Cylindrical radius samples
        z: Axial samples
        h: Step (scalar or array); defaults to default_step(rho)
        order: Stencil order, 2 or 4

    Returns:
        Derivatives2D: value, gradient and second derivatives
    """
    rho = np.asarray(rho, dtype=float)
    z = np.asarray(z, dtype=float)
    rho, z = np.broadcast_arrays(rho, z)
    h = default_step(rho) if h is None else np.broadcast_to(np.asarray(h, dtype=float), rho.shape)

    f0 = np.asarray(func(rho, z), dtype=float)
    hh = _expand(h, f0)

    if order == 2:
        fr_p, fr_m = func(rho + h, z), func(rho - h, z)
        fz_p, fz_m = func(rho, z + h), func(rho, z - h)
        d_rho = (fr_p - fr_m) / (2.0 * hh)
        d_z = (fz_p - fz_m) / (2.0 * hh)
        d_rho_rho = (fr_p - 2.0 * f0 + fr_m) / hh ** 2
        d_zz = (fz_p - 2.0 * f0 + fz_m) / hh ** 2
    elif order == 4:
        fr = [func(rho + k * h, z) for k in (-2, -1, 1, 2)]
        fz = [func(rho, z + k * h) for k in (-2, -1, 1, 2)]
        d_rho = (fr[0] - 8.0 * fr[1] + 8.0 * fr[2] - fr[3]) / (12.0 * hh)
        d_z = (fz[0] - 8.0 * fz[1] + 8.0 * fz[2] - fz[3]) / (12.0 * hh)
        d_rho_rho = (-fr[0] + 16.0 * fr[1] - 30.0 * f0 + 16.0 * fr[2] - fr[3]) / (12.0 * hh ** 2)
        d_zz = (-fz[0] + 16.0 * fz[1] - 30.0 * f0 + 16.0 * fz[2] - fz[3]) / (12.0 * hh ** 2)
    else:
        raise ValueError(f"Unsupported stencil order {order}")

    return Derivatives2D(f0, np.asarray(d_rho), np.asarray(d_z),
                         np.asarray(d_rho_rho), np.asarray(d_zz))


def derivative_1d(func: Callable[[np.ndarray], np.ndarray], x, h) -> np.ndarray:
    """Five-point first derivative of a vectorized function of one variable"""
    x = np.asarray(x, dtype=float)
    h = np.asarray(h, dtype=float)
    f = [np.asarray(func(x + k * h), dtype=float) for k in (-2, -1, 1, 2)]
    hh = _expand(np.broadcast_to(h, x.shape), f[0])
    return (f[0] - 8.0 * f[1] + 8.0 * f[2] - f[3]) / (12.0 * hh)


def richardson_extrapolate(base_values: Sequence, p: float, r: float = 2.0):
    """
    Richardson extrapolation on a sequence of approximations

    Args:
        base_values: Approximations at steps decreasing by the factor r
        p: Order of the leading error term
        r: Step reduction factor between successive entries

    Returns:
        Extrapolated value (float or array)
    """
    n = len(base_values)
    if n < 2:
        raise ValueError("richardson_extrapolate requires at least two base values.")

    vals = [np.asarray(v, dtype=float) for v in base_values]

    for j in range(1, n):
        factor = r ** (p * j)
        for k in range(n - 1, j - 1, -1):
            vals[k] = (factor * vals[k] - vals[k - 1]) / (factor - 1.0)

    result = vals[-1]
    return float(result) if result.ndim == 0 else result


def gauss_legendre(n: int, a: float, b: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    Gauss-Legendre nodes and weights on [a, b]

    Args:
        n: Number of nodes
        a: Lower limit
        b: Upper limit

    Returns:
        tuple: (nodes, weights)
    """
    x, w = special.roots_legendre(n)
    half = 0.5 * (b - a)
    return half * x + 0.5 * (a + b), half * w


def composite_gauss(edges: Sequence[float], n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Concatenated Gauss-Legendre rule over consecutive sub-intervals"""
    nodes, weights = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        if b <= a:
            continue
        x, w = gauss_legendre(n, a, b)
        nodes.append(x)
        weights.append(w)
    if not nodes:
        return np.zeros(0), np.zeros(0)
    return np.concatenate(nodes), np.concatenate(weights)


@dataclass
class DecayFit:
    """Least-squares fit y = limit + coefficient * x**(-exponent)"""
    limit: float
    coefficient: float
    exponent: float
    residual: float


def fit_power_decay(x: Sequence[float], y: Sequence[float],
                    exponent_range: Tuple[float, float] = config.MASS_FIT_EXPONENT_RANGE) -> DecayFit:
    """
    Fit a single power-law correction and return its limit

    Args:
        x: Increasing sample abscissae (radii)
        y: Sampled values
        exponent_range: Search bracket for the decay exponent

    Returns:
        DecayFit: limit, coefficient, exponent and residual norm
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 3:
        raise ValueError("fit_power_decay requires at least three samples")

    scale = x[0]

    def solve(kappa: float):
        basis = np.column_stack([np.ones_like(x), (x / scale) ** (-kappa)])
        coeffs, _, _, _ = np.linalg.lstsq(basis, y, rcond=None)
        res = float(np.linalg.norm(basis @ coeffs - y))
        return coeffs, res

    result = optimize.minimize_scalar(lambda k: solve(k)[1], bounds=exponent_range,
                                      method='bounded', options={'xatol': 1e-10})
    kappa = float(result.x)
    coeffs, res = solve(kappa)
    logger.debug(f"Decay fit exponent={kappa:.6g} limit={coeffs[0]:.17g} residual={res:.3e}")
    return DecayFit(limit=float(coeffs[0]), coefficient=float(coeffs[1] * scale ** kappa),
                    exponent=kappa, residual=res)
