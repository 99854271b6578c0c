"""
Mass Integrands

This module implements the flux densities evaluated on the level spheres
of a model chart. A family and its model are sampled at the same Brill
points (rho, z) = model.coordinate_transform(r, theta); radial derivatives
are five-point differences in r at fixed theta.

Two densities are provided. The exact one is the linearized scalar
curvature flux (div_b e - d Tr_b e)(d_r) of e = g - b for a model with
b_rr = 1 and b_thetatheta = r^2 b_rr:

    -d_r e_rr + e_rr d_r log rho - Tr(G_b^-1 d_r E) - 1/2 Tr(E d_r G_b^-1).

The reduced one is X(d_r) written in the Brill fields,

    -2 d_r(alpha - alpha_o + Z) + (2 alpha - 2 alpha_o - Z) d_r log rho
    - (V - V_o) d_r V_o - (W - W_o) d_r W_o,

which also serves the flux between two geometries of the same class.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from src import config
from src.exceptions import ClassMismatchError
from src.families import same_class
from src.geometry.curvature import sample
from src.rods import AsymptoticClass
from src.utils.numerics import derivative_1d

logger = logging.getLogger(__name__)


@dataclass
class RadialSample:
    """Metric data on a model sphere of radius r together with r-derivatives"""
    r: float
    theta: np.ndarray
    asymptotic_class: AsymptoticClass
    rho: np.ndarray
    d_log_rho: np.ndarray
    alpha: np.ndarray
    d_alpha: np.ndarray
    g_rr: np.ndarray
    d_g_rr: np.ndarray
    G: np.ndarray  # (..., 2, 2)
    d_G: np.ndarray


def radial_speed(cls: AsymptoticClass, r) -> np.ndarray:
    """|d(rho, z)/dr| of the model chart: ell (ALF, AF) or r/p (ALE)"""
    if cls.tag == 'ALE':
        return np.asarray(r, dtype=float) / cls.p
    return np.asarray(r, dtype=float) * 0 + cls.ell


def radial_sample(sampler, model, cls: AsymptoticClass, r: float, theta,
                  step: Optional[float] = None) -> RadialSample:
    """
    Sample a geometry on the model sphere of radius r

    Args:
        sampler: Family (or Brill sampler) to evaluate
        model: Model family that supplies the polar chart
        cls: Asymptotic class of the sampler
        r: Model radius
        theta: Polar angles (Gauss nodes)
        step: Radial difference step; defaults to MASS_RADIAL_STEP * r

    Returns:
        RadialSample: Values and radial derivatives
    """
    theta = np.asarray(theta, dtype=float)
    h = config.MASS_RADIAL_STEP * r if step is None else step

    def stacked(radius):
        radius = float(radius)
        rho, z = model.coordinate_transform(radius, theta)
        s = sample(sampler, rho, z)
        g_rr = np.exp(2 * s.alpha) * radial_speed(cls, radius) ** 2
        return np.concatenate([
            np.log(rho)[..., None], s.alpha[..., None], g_rr[..., None],
            s.G.reshape(s.G.shape[:-2] + (4,)),
        ], axis=-1)

    values = stacked(r)
    derivs = derivative_1d(stacked, r, h)
    shape = theta.shape + (2, 2)
    return RadialSample(
        r=float(r), theta=theta, asymptotic_class=cls,
        rho=np.exp(values[..., 0]), d_log_rho=derivs[..., 0],
        alpha=values[..., 1], d_alpha=derivs[..., 1],
        g_rr=values[..., 2], d_g_rr=derivs[..., 2],
        G=values[..., 3:].reshape(shape), d_G=derivs[..., 3:].reshape(shape),
    )


def reduced_fields(s: RadialSample) -> Tuple[np.ndarray, ...]:
    """
    Z, V, W and their r-derivatives from the torus matrix

    Returns:
        tuple: (Z, V, W, dZ, dV, dW)
    """
    b = s.asymptotic_class.beta_ell
    S = np.array([[1.0, -b], [0.0, 1.0]])
    Gt = S.T @ s.G @ S
    dGt = S.T @ s.d_G @ S
    det = s.G[..., 0, 0] * s.G[..., 1, 1] - s.G[..., 0, 1] ** 2
    root = np.sqrt(det)
    half_trace = 0.5 * np.trace(np.linalg.solve(s.G, s.d_G), axis1=-2, axis2=-1)

    Z = np.log(root) - np.log(s.rho)
    dZ = half_trace - s.d_log_rho
    V = 0.5 * np.log(Gt[..., 0, 0] / Gt[..., 1, 1])
    dV = 0.5 * (dGt[..., 0, 0] / Gt[..., 0, 0] - dGt[..., 1, 1] / Gt[..., 1, 1])
    sh = Gt[..., 0, 1] / root
    W = np.arcsinh(sh)
    dW = (dGt[..., 0, 1] / root - sh * half_trace) / np.sqrt(1 + sh ** 2)
    return Z, V, W, dZ, dV, dW


def _check_pair(s_g: RadialSample, s_o: RadialSample) -> None:
    if not same_class(s_g.asymptotic_class, s_o.asymptotic_class):
        raise ClassMismatchError(f"Flux between classes {s_g.asymptotic_class.label()} and "
                                 f"{s_o.asymptotic_class.label()}")
    if s_g.r != s_o.r or s_g.theta.shape != s_o.theta.shape:
        raise ClassMismatchError("Flux samples must share the sphere and its nodes")


def x_flux_density(s_g: RadialSample, s_o: RadialSample) -> np.ndarray:
    """X(d_r) between a geometry and a reference of the same class"""
    _check_pair(s_g, s_o)
    Z, V, W, dZ, dV, dW = reduced_fields(s_g)
    Zo, Vo, Wo, dZo, dVo, dWo = reduced_fields(s_o)
    dalpha = s_g.d_alpha - s_o.d_alpha
    alpha = s_g.alpha - s_o.alpha
    return (-2 * (dalpha + dZ - dZo)
            + (2 * alpha - (Z - Zo)) * s_g.d_log_rho
            - (V - Vo) * dVo
            - (W - Wo) * dWo)


def exact_density(s_g: RadialSample, s_b: RadialSample) -> np.ndarray:
    """
    (div_b e - d Tr_b e)(d_r) against the model sample

    Written in e = g - b and its radial derivative, which is the difference
    of the two five-point derivatives, so g = b gives exactly zero. The
    model's own flux, which vanishes for b_rr = 1 and det G_b = rho^2, is
    left out.
    """
    _check_pair(s_g, s_b)
    inv_b = np.linalg.inv(s_b.G)
    d_inv_b = -inv_b @ s_b.d_G @ inv_b
    e_rr = s_g.g_rr - s_b.g_rr
    d_e_rr = s_g.d_g_rr - s_b.d_g_rr
    E = s_g.G - s_b.G
    d_E = s_g.d_G - s_b.d_G
    trace_1 = np.trace(inv_b @ d_E, axis1=-2, axis2=-1)
    trace_2 = np.trace(E @ d_inv_b, axis1=-2, axis2=-1)
    return -d_e_rr + e_rr * s_b.d_log_rho - trace_1 - 0.5 * trace_2


def mass_integrand(s_g: RadialSample, s_b: RadialSample, kind: str = 'exact') -> np.ndarray:
    """
    Mass density on a model sphere

    Args:
        s_g: Sample of the geometry
        s_b: Sample of the model on the same nodes
        kind: 'exact' for the linearized scalar curvature flux, 'reduced' for X(d_r)

    Returns:
        np.ndarray: Density at each node
    """
    if kind == 'exact':
        return exact_density(s_g, s_b)
    if kind == 'reduced':
        return x_flux_density(s_g, s_b)
    raise ValueError(f"Unknown mass integrand {kind!r}")
