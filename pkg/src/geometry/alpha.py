"""
Conformal Factor Reconstruction

This module implements the quadrature of alpha from a torus matrix field
G = rho Phi in the Ricci-flat setting. With currents j = G^-1 dG,

    d_z alpha   = rho/4 Tr(j_z j_rho),
    d_rho alpha = -1/(2 rho) + rho/8 Tr(j_rho^2 - j_z^2).

alpha is integrated along two L-shaped paths that avoid the axis, from the
target point to a reference point Q on z = 0. alpha(Q) comes from a ray
integral to infinity of d_rho (alpha - alpha_b), where alpha_b is the
conformal factor of the flat model of the class. Disagreement between the
two paths signals that the field is not harmonic.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np
from scipy import integrate

from src import config
from src.exceptions import DomainError, IntegrabilityError
from src.rods import AsymptoticClass, RodDataSet
from src.utils.numerics import composite_gauss, derivatives_2d, richardson_extrapolate

logger = logging.getLogger(__name__)


@dataclass
class AlphaField:
    """Reconstructed alpha at Brill points"""
    rho: np.ndarray
    z: np.ndarray
    alpha: np.ndarray
    loop_gap: np.ndarray  # |alpha along path 1 - alpha along path 2|
    reference_rho: float
    reference_alpha: float


def model_alpha(cls: AsymptoticClass, rho, z) -> np.ndarray:
    """alpha of the flat model: -log ell (ALF, AF) or 1/2 log(p / (2R)) (ALE)"""
    rho = np.asarray(rho, dtype=float)
    z = np.asarray(z, dtype=float)
    if cls.tag == 'ALE':
        return 0.5 * np.log(cls.p / (2 * np.hypot(rho, z)))
    return np.zeros(np.broadcast(rho, z).shape) - np.log(cls.ell)


def _model_alpha_d_rho(cls: AsymptoticClass, rho, z) -> np.ndarray:
    if cls.tag == 'ALE':
        return -0.5 * rho / (rho ** 2 + z ** 2)
    return np.zeros(np.broadcast(rho, z).shape)


def _as_function(phi_field) -> Callable[[np.ndarray, np.ndarray], np.ndarray]:
    if hasattr(phi_field, 'torus_matrix'):
        return phi_field.torus_matrix
    return phi_field


def alpha_gradient(torus_matrix: Callable, rho, z) -> Tuple[np.ndarray, np.ndarray]:
    """
    (d_rho alpha, d_z alpha) from a torus matrix field

    Args:
        torus_matrix: Function (rho, z) -> G with shape (..., 2, 2)
        rho: Cylindrical radius, > 0
        z: Axial coordinate

    Returns:
        tuple: (d_rho alpha, d_z alpha)
    """
    rho = np.asarray(rho, dtype=float)
    D = derivatives_2d(torus_matrix, rho, z, order=4)
    j_rho = np.linalg.solve(D.value, D.d_rho)
    j_z = np.linalg.solve(D.value, D.d_z)

    def trace(a, b):
        return np.einsum('...ij,...ji->...', a, b)

    d_rho = -0.5 / rho + rho / 8 * (trace(j_rho, j_rho) - trace(j_z, j_z))
    d_z = rho / 4 * trace(j_z, j_rho)
    return d_rho, d_z


def _leg_integral(torus_matrix: Callable, start: Tuple[np.ndarray, np.ndarray],
                  end: Tuple[np.ndarray, np.ndarray], nodes: int) -> np.ndarray:
    """Line integral of grad alpha along straight legs, trapezoid + one Richardson step"""
    r0, z0 = (np.asarray(v, dtype=float)[..., None] for v in start)
    r1, z1 = (np.asarray(v, dtype=float)[..., None] for v in end)
    t = np.linspace(0.0, 1.0, 2 * nodes - 1)
    rho = r0 + t * (r1 - r0)
    z = z0 + t * (z1 - z0)
    d_rho, d_z = alpha_gradient(torus_matrix, rho, z)
    integrand = d_rho * (r1 - r0) + d_z * (z1 - z0)
    coarse = integrate.trapezoid(integrand[..., ::2], t[::2], axis=-1)
    fine = integrate.trapezoid(integrand, t, axis=-1)
    return richardson_extrapolate([coarse, fine], p=2)


def _tail(torus_matrix: Callable, cls: AsymptoticClass, rho_ref: float) -> float:
    """
    alpha(Q) - alpha_b(Q) at Q = (rho_ref, 0) from the ray to infinity

    In u = rho_ref / rho the integrand tends to a constant. Gauss rules cover
    [u_0, 1] and the piece [0, u_0] is the linear extrapolation from u_0 and
    2 u_0; G is sampled only out to rho = rho_ref / u_0.
    """
    def integrand(u):
        s = rho_ref / u
        zero = np.zeros_like(s)
        d_rho, _ = alpha_gradient(torus_matrix, s, zero)
        # s = rho_ref / u, ds = -rho_ref / u^2 du
        return (d_rho - _model_alpha_d_rho(cls, s, zero)) * rho_ref / u ** 2

    u0 = config.ALPHA_TAIL_EDGES[0]
    u, w = composite_gauss(config.ALPHA_TAIL_EDGES, config.ALPHA_TAIL_POINTS)
    g1, g2 = integrand(np.array([u0, 2 * u0]))
    return -float(np.sum(w * integrand(u)) + u0 * (1.5 * g1 - 0.5 * g2))


def reference_radius(rods: Optional[RodDataSet]) -> float:
    """Reference radius on z = 0, clear of the finite rods"""
    extent = 0.0
    if rods is not None and rods.turning_points:
        extent = max(abs(t) for t in rods.turning_points)
    return max(config.ALPHA_REFERENCE_RHO, 4.0 * extent)


def alpha_from_phi(phi_field, rods: Optional[RodDataSet], cls: AsymptoticClass, rho, z,
                   nodes: int = config.ALPHA_PATH_NODES,
                   tol: float = config.ALPHA_LOOP_TOL) -> AlphaField:
    """
    Reconstruct alpha from a harmonic torus matrix field

    Args:
        phi_field: Function (rho, z) -> G = rho Phi, or an object with torus_matrix
        rods: Rod data of the geometry (places the reference point)
        cls: Asymptotic class; fixes the integration constant
        rho: Cylindrical radius of the targets, > 0
        z: Axial coordinate of the targets
        nodes: Trapezoid nodes per leg on the coarse level
        tol: Largest accepted disagreement between the two paths

    Returns:
        AlphaField: alpha and the loop gap at each target
    """
    rho = np.asarray(rho, dtype=float)
    z = np.asarray(z, dtype=float)
    rho, z = np.broadcast_arrays(rho, z)
    if np.any(rho <= 0):
        raise DomainError("alpha quadrature needs off-axis points (rho > 0)")

    G = _as_function(phi_field)
    rho_ref = reference_radius(rods)
    ref = np.full(rho.shape, rho_ref)
    zero = np.zeros(rho.shape)

    alpha_q = float(model_alpha(cls, rho_ref, 0.0)) + _tail(G, cls, rho_ref)

    # path 1: along z to the equator, then along rho
    first = _leg_integral(G, (rho, z), (rho, zero), nodes) + _leg_integral(G, (rho, zero), (ref, zero), nodes)
    # path 2: along rho to the reference radius, then along z
    second = _leg_integral(G, (rho, z), (ref, z), nodes) + _leg_integral(G, (ref, z), (ref, zero), nodes)

    alpha_1 = alpha_q - first
    alpha_2 = alpha_q - second
    gap = np.abs(alpha_1 - alpha_2)
    worst = float(np.max(gap)) if gap.size else 0.0
    logger.debug(f"alpha quadrature: reference rho={rho_ref:g}, alpha(Q)={alpha_q:.17g}, loop gap={worst:.3e}")
    if worst > tol:
        raise IntegrabilityError(
            f"alpha quadrature is path dependent: loop gap {worst:.3e} exceeds {tol:.1e}",
            {'max_loop_gap': worst, 'reference_rho': rho_ref})

    return AlphaField(rho=rho, z=z, alpha=0.5 * (alpha_1 + alpha_2), loop_gap=gap,
                      reference_rho=rho_ref, reference_alpha=alpha_q)
