"""
Brill Reduction

This module implements the passage between the torus matrix G and the
reduced fields (Z, Phi) together with the Fermi coordinates (V, W) of Phi
on the hyperbolic plane.

For a twist constant b = beta * ell the matrix Phi is first conjugated by
S = [[1, -b], [0, 1]], and V, W are read off the conjugated matrix:

    V = 1/2 log(Phi~11 / Phi~22),    W = asinh(Phi~12).

With b = 0 this is the untwisted branch used for ALE, ALF and AF_0 ends.
"""

import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from src import config
from src.exceptions import DomainError

logger = logging.getLogger(__name__)


@dataclass
class HyperbolicPoint:
    """Fermi coordinates (V, W) on the hyperbolic plane"""
    V: np.ndarray
    W: np.ndarray

    def __post_init__(self):
        self.V = np.asarray(self.V, dtype=float)
        self.W = np.asarray(self.W, dtype=float)
        if not (np.all(np.isfinite(self.V)) and np.all(np.isfinite(self.W))):
            raise DomainError("Hyperbolic points need finite V and W")


@dataclass
class ReducedFields:
    """Conformal density Z and the unit determinant matrix Phi"""
    Z: np.ndarray
    Phi: np.ndarray  # (..., 2, 2)
    beta_ell: float = 0.0

    @property
    def det_phi(self) -> np.ndarray:
        return self.Phi[..., 0, 0] * self.Phi[..., 1, 1] - self.Phi[..., 0, 1] ** 2


def _matrix(m11, m12, m22) -> np.ndarray:
    return np.stack([np.stack([m11, m12], axis=-1), np.stack([m12, m22], axis=-1)], axis=-2)


def phi_from_point(point: HyperbolicPoint, beta_ell: float = config.BETA_ZERO) -> np.ndarray:
    """
    Unit determinant matrix Phi with Fermi coordinates (V, W)

    Args:
        point: Fermi coordinates
        beta_ell: Twist constant of the AF end

    Returns:
        np.ndarray: Phi with shape (..., 2, 2)
    """
    ev = np.exp(point.V)
    ch = np.cosh(point.W)
    sh = np.sinh(point.W)
    b = beta_ell
    phi11 = ev * ch
    phi12 = sh + b * ev * ch
    phi22 = (np.exp(-point.V) + b * b * ev) * ch + 2 * b * sh
    return _matrix(phi11, phi12, phi22)


def reduce_torus_matrix(G, rho, beta_ell: float = config.BETA_ZERO) -> Tuple[ReducedFields, HyperbolicPoint]:
    """
    Split G into Z, Phi and the Fermi coordinates of Phi

    Args:
        G: Torus matrix, shape (..., 2, 2), positive definite
        rho: Cylindrical radius, > 0
        beta_ell: Twist constant; 0 selects the untwisted branch

    Returns:
        tuple: (ReducedFields, HyperbolicPoint)
    """
    G = np.asarray(G, dtype=float)
    rho = np.asarray(rho, dtype=float)
    if G.shape[-2:] != (2, 2):
        raise DomainError(f"Torus matrix must be 2x2, got shape {G.shape}")
    if np.any(rho <= 0):
        raise DomainError("Brill reduction needs rho > 0")

    g11, g12, g22 = G[..., 0, 0], G[..., 0, 1], G[..., 1, 1]
    det = g11 * g22 - g12 ** 2
    if np.any(g11 <= 0) or np.any(det <= 0) or not np.all(np.isfinite(det)):
        raise DomainError("Torus matrix is not positive definite")

    root = np.sqrt(det)
    Z = 0.5 * np.log(det) - np.log(rho)
    p11, p12, p22 = g11 / root, g12 / root, g22 / root

    b = beta_ell
    t12 = p12 - b * p11
    t22 = p22 - 2 * b * p12 + b * b * p11
    V = 0.5 * np.log(p11 / t22)
    W = np.arcsinh(t12)

    fields = ReducedFields(Z=Z, Phi=_matrix(p11, p12, p22), beta_ell=b)
    return fields, HyperbolicPoint(V, W)


def reconstruct_torus_matrix(point: HyperbolicPoint, Z, rho, beta_ell: float = config.BETA_ZERO) -> np.ndarray:
    """
    Rebuild G = rho e^Z Phi(V, W)

    Args:
        point: Fermi coordinates of Phi
        Z: Conformal density
        rho: Cylindrical radius, > 0
        beta_ell: Twist constant used in the reduction

    Returns:
        np.ndarray: Torus matrix (..., 2, 2)
    """
    rho = np.asarray(rho, dtype=float)
    if np.any(rho <= 0):
        raise DomainError("Reconstruction needs rho > 0")
    factor = rho * np.exp(np.asarray(Z, dtype=float))
    return factor[..., None, None] * phi_from_point(point, beta_ell)
