"""
Hyperbolic Plane

Distance and harmonic map energy density for the target metric
cosh^2 W dV^2 + dW^2.
"""

import numpy as np

from src.geometry.reduction import HyperbolicPoint


def h2_distance(p: HyperbolicPoint, q: HyperbolicPoint) -> np.ndarray:
    """
    Hyperbolic distance between points in Fermi coordinates

    Uses sinh^2(d/2) = cosh W1 cosh W2 sinh^2(dV/2) + sinh^2(dW/2), which is
    accurate for nearby points.

    Args:
        p: First point
        q: Second point

    Returns:
        np.ndarray: Distance d >= 0
    """
    half_v = np.sinh(0.5 * (p.V - q.V))
    half_w = np.sinh(0.5 * (p.W - q.W))
    s2 = np.cosh(p.W) * np.cosh(q.W) * half_v ** 2 + half_w ** 2
    return 2.0 * np.arcsinh(np.sqrt(s2))


def h2_energy_density(grad_v, grad_w, W) -> np.ndarray:
    """
    cosh^2 W |grad V|^2 + |grad W|^2

    Args:
        grad_v: (d_rho V, d_z V), last axis of length 2
        grad_w: (d_rho W, d_z W)
        W: Second Fermi coordinate

    Returns:
        np.ndarray: Energy density
    """
    grad_v = np.asarray(grad_v, dtype=float)
    grad_w = np.asarray(grad_w, dtype=float)
    return np.cosh(W) ** 2 * np.sum(grad_v ** 2, axis=-1) + np.sum(grad_w ** 2, axis=-1)
