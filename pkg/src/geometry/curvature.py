"""
Scalar Curvature

This module implements the scalar curvature of a Brill-form metric

    g = e^{2 alpha} (d rho^2 + dz^2) + G_ij (dphi^i + A^i_a dx^a)(dphi^j + A^j_b dx^b)

from finite differences of (alpha, Z, Phi, A) on the half-plane. With
Delta the flat three dimensional Laplacian in cylindrical coordinates,

    e^{2 alpha} R = -2 Delta alpha + 2 grad alpha . grad log rho
                    - 1/4 Tr(Phi^-1 grad Phi)^2
                    - 1/2 e^{-2 alpha} G_ij F^i_{rho z} F^j_{rho z}
                    - 2 Delta Z - 3/2 |grad Z|^2 - grad Z . grad log rho
                    + 1/(2 rho^2).
"""

import logging
from typing import Callable, Union

import numpy as np

from src import config
from src.exceptions import DomainError
from src.families.base import BrillSample
from src.utils.numerics import default_step, derivatives_2d

logger = logging.getLogger(__name__)

Sampler = Union[Callable[[np.ndarray, np.ndarray], BrillSample], object]

# stacked field layout: alpha, Z, Phi11, Phi12, Phi22, A(rho)^1, A(z)^1, A(rho)^2, A(z)^2
_ALPHA, _Z, _P11, _P12, _P22, _A1R, _A1Z, _A2R, _A2Z = range(9)


def sample(sampler: Sampler, rho, z) -> BrillSample:
    """Evaluate a family or a plain sampling function"""
    if hasattr(sampler, 'sample_brill'):
        return sampler.sample_brill(rho, z)
    return sampler(rho, z)


def _stacked_fields(sampler: Sampler):
    def fields(rho, z):
        s = sample(sampler, rho, z)
        det = s.det_G
        root = np.sqrt(det)
        Z = 0.5 * np.log(det) - np.log(s.rho)
        return np.stack([
            s.alpha, Z,
            s.G[..., 0, 0] / root, s.G[..., 0, 1] / root, s.G[..., 1, 1] / root,
            s.A[..., 0, 0], s.A[..., 0, 1], s.A[..., 1, 0], s.A[..., 1, 1],
        ], axis=-1)
    return fields


def _trace_square(p11, p12, p22, d11, d12, d22):
    # Tr((Phi^-1 dPhi)^2) with det Phi = 1
    m11 = p22 * d11 - p12 * d12
    m12 = p22 * d12 - p12 * d22
    m21 = -p12 * d11 + p11 * d12
    m22 = -p12 * d12 + p11 * d22
    return m11 ** 2 + 2 * m12 * m21 + m22 ** 2


def scalar_curvature(sampler: Sampler, rho, z, h=None, order: int = config.FD_ORDER) -> np.ndarray:
    """
    Scalar curvature at interior points of the half-plane

    Args:
        sampler: Family with sample_brill, or a function (rho, z) -> BrillSample
        rho: Cylindrical radius samples
        z: Axial samples
        h: Finite difference step; defaults to max(1e-4, 1e-3 rho)
        order: Stencil order, 2 or 4

    Returns:
        np.ndarray: R at each point
    """
    rho = np.asarray(rho, dtype=float)
    z = np.asarray(z, dtype=float)
    rho, z = np.broadcast_arrays(rho, z)
    h = default_step(rho) if h is None else np.broadcast_to(np.asarray(h, dtype=float), rho.shape)
    if np.any(rho <= 2 * h):
        raise DomainError("Finite difference stencil leaves the half-plane; need rho > 2h")

    D = derivatives_2d(_stacked_fields(sampler), rho, z, h, order)
    f, fr, fz, frr, fzz = D.value, D.d_rho, D.d_z, D.d_rho_rho, D.d_zz

    def laplacian(i):
        return frr[..., i] + fr[..., i] / rho + fzz[..., i]

    alpha = f[..., _ALPHA]
    p11, p12, p22 = f[..., _P11], f[..., _P12], f[..., _P22]

    trace = (_trace_square(p11, p12, p22, fr[..., _P11], fr[..., _P12], fr[..., _P22])
             + _trace_square(p11, p12, p22, fz[..., _P11], fz[..., _P12], fz[..., _P22]))

    # F^i_{rho z} = d_rho A^i_z - d_z A^i_rho; G = rho e^Z Phi
    f1 = fr[..., _A1Z] - fz[..., _A1R]
    f2 = fr[..., _A2Z] - fz[..., _A2R]
    scale = rho * np.exp(f[..., _Z])
    field_term = scale * (p11 * f1 ** 2 + 2 * p12 * f1 * f2 + p22 * f2 ** 2)

    grad_z2 = fr[..., _Z] ** 2 + fz[..., _Z] ** 2
    bracket = (-2 * laplacian(_ALPHA) + 2 * fr[..., _ALPHA] / rho
               - 0.25 * trace
               - 0.5 * np.exp(-2 * alpha) * field_term
               - 2 * laplacian(_Z) - 1.5 * grad_z2 - fr[..., _Z] / rho
               + 0.5 / rho ** 2)
    return np.exp(-2 * alpha) * bracket


class PerturbedSampler:
    """
    A family with G11 scaled by 1 + amplitude * rho^2 exp(-rho^2 - z^2)

    Breaks Ricci-flatness and det G = rho^2 while staying smooth, so it
    exercises every term of the curvature formula.
    """

    smooth_axis = True

    def __init__(self, family, amplitude: float = 0.1):
        self.family = family
        self.amplitude = float(amplitude)

    def factor(self, rho, z, xp=np):
        return 1 + self.amplitude * rho ** 2 * xp.exp(-rho ** 2 - z ** 2)

    def sample_brill(self, rho, z) -> BrillSample:
        s = self.family.sample_brill(rho, z)
        G = s.G.copy()
        G[..., 0, 0] = G[..., 0, 0] * self.factor(s.rho, s.z)
        return BrillSample(rho=s.rho, z=s.z, alpha=s.alpha, G=G, A=s.A)

    def coordinate_transform(self, r, theta):
        return self.family.coordinate_transform(r, theta)

    def symbolic_metric(self, r, theta):
        import sympy

        rho, z, e2a, (g11, g12, g22) = self.family.symbolic_metric(r, theta)
        return rho, z, e2a, (g11 * self.factor(rho, z, xp=sympy), g12, g22)
