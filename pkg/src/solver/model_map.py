"""
Model Maps

This module implements the reference map (V_bar, W_bar) that carries the
rod singularities of a rod data set: V_bar ~ log rho on case I rods,
V_bar ~ -log rho on case II_0 rods and W_bar ~ -/+ log rho on case III
rods, and the flat model behavior at infinity.

Rod data made of (1, 0) and (0, 1) rods with no twist give a diagonal map,
W_bar = 0, and V_bar is a superposition of axisymmetric rod potentials,
which is exactly harmonic. An exact geometry sharing the rods seeds every
other map when one is given. Otherwise the torus matrix is blended from
flat corner models, one per turning point, with a smooth partition of
unity in z, and handed over to the flat model of the class far out.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np

from src.exceptions import ClassMismatchError, DomainError
from src.families import model_for_class, same_class
from src.geometry.reduction import reduce_torus_matrix
from src.rods import AsymptoticClass, Rod, RodDataSet, RodStructure, corner_determinant
from src.utils.numerics import Derivatives2D, default_step, derivatives_2d

logger = logging.getLogger(__name__)

WEYL = 'weyl'
BLEND = 'blend'


def _log_distance_sum(rho, dz, sign):
    """log(R + sign * dz) with R = sqrt(rho^2 + dz^2), stable on the axis"""
    R = np.hypot(rho, dz)
    s = sign * dz
    with np.errstate(divide='ignore', invalid='ignore'):
        small = rho ** 2 / (R - s)
    return np.log(np.where(s >= 0, R + s, small))


def rod_potential(rod: Rod, rho, z) -> np.ndarray:
    """
    Axisymmetric harmonic potential of a rod, ~ log rho on the rod

    Args:
        rod: Axis rod (finite or semi-infinite)
        rho: Cylindrical radius (> 0)
        z: Axial samples

    Returns:
        np.ndarray: Potential values
    """
    rho = np.asarray(rho, dtype=float)
    z = np.asarray(z, dtype=float)
    if not np.isfinite(rod.start) and not np.isfinite(rod.end):
        return np.log(rho) + 0 * z
    if not np.isfinite(rod.start):
        return 0.5 * _log_distance_sum(rho, z - rod.end, 1.0)
    if not np.isfinite(rod.end):
        return 0.5 * _log_distance_sum(rho, z - rod.start, -1.0)

    a, b = rod.start, rod.end
    ra, rb = np.hypot(rho, z - a), np.hypot(rho, z - b)
    prod = (z - a) * (z - b)
    with np.errstate(divide='ignore', invalid='ignore'):
        inside = rho ** 2 * (rho ** 2 + (z - a) ** 2 + (z - b) ** 2) / (ra * rb - prod)
    # (ra + rb)^2 - L^2 = 2 (rho^2 + (z - a)(z - b) + ra rb)
    core = np.where(prod < 0, inside, ra * rb + prod)
    numerator = 2 * (rho ** 2 + core) / (ra + rb + (b - a))
    return 0.5 * np.log(numerator / (ra + rb + (b - a)))


def weyl_signs(rods: RodDataSet) -> Tuple[int, ...]:
    """+1 for (1, 0) rods, -1 for (0, 1) rods"""
    signs = []
    for s in rods.structures:
        v = s.as_tuple()
        if v in ((1, 0), (-1, 0)):
            signs.append(1)
        elif v in ((0, 1), (0, -1)):
            signs.append(-1)
        else:
            raise DomainError(f"Rod {s} has no diagonal potential")
    return tuple(signs)


def weyl_potential(rods: RodDataSet, rho, z) -> np.ndarray:
    total = 0.0
    for rod, sign in zip(rods.rods, weyl_signs(rods)):
        total = total + sign * rod_potential(rod, rho, z)
    return np.asarray(total, dtype=float)


def smooth_step(t) -> np.ndarray:
    """C-infinity step: 0 for t <= 0, 1 for t >= 1"""
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    with np.errstate(divide='ignore', over='ignore'):
        a = np.where(t > 0, np.exp(-1.0 / t), 0.0)
        b = np.where(t < 1, np.exp(-1.0 / (1.0 - t)), 0.0)
    return a / (a + b)


def corner_matrix(below: RodStructure, above: RodStructure, corner: float, rho, z) -> np.ndarray:
    """
    Flat torus matrix with kernel `below` on the axis under the corner and `above` over it

    It is diag(R + dz, R - dz), the flat R^4 matrix, written in the basis
    that sends (below, above) to the standard one; det G = rho^2.

    Args:
        below: Rod structure on z < corner
        above: Rod structure on z > corner (|det| = 1 with below)
        corner: Turning point
        rho: Cylindrical radius (> 0)
        z: Axial samples

    Returns:
        np.ndarray: Torus matrices, shape (..., 2, 2)
    """
    det = corner_determinant(below, above)
    if abs(det) != 1:
        raise DomainError(f"Corner {below} | {above} at z={corner:g} is not admissible")
    rho, z = np.broadcast_arrays(np.asarray(rho, dtype=float), np.asarray(z, dtype=float))
    dz = z - corner
    R = np.hypot(rho, dz)
    with np.errstate(divide='ignore', invalid='ignore'):
        plus = np.where(dz >= 0, R + dz, rho ** 2 / (R - dz))
        minus = np.where(dz <= 0, R - dz, rho ** 2 / (R + dz))
    # inverse of the matrix with columns below, above
    M = np.array([[above.v2, -above.v1], [-below.v2, below.v1]], dtype=float) * det
    G = np.empty(rho.shape + (2, 2))
    for i in range(2):
        for j in range(2):
            G[..., i, j] = M[0, i] * M[0, j] * plus + M[1, i] * M[1, j] * minus
    return G


@dataclass
class ModelMap:
    """
    Reference map with the rod singularities of a rod data set

    evaluate(rho, z) returns the pair (V_bar, W_bar) for rho > 0. harmonic
    marks maps with W_bar = 0 and V_bar harmonic for the flat operator.
    """
    rods: RodDataSet
    asymptotic_class: AsymptoticClass
    evaluate: Callable[[np.ndarray, np.ndarray], Tuple[np.ndarray, np.ndarray]]
    source: str = WEYL
    family: Optional[object] = field(default=None, repr=False)
    harmonic: bool = False

    @property
    def beta_ell(self) -> float:
        return self.asymptotic_class.beta_ell

    def values(self, rho, z) -> Tuple[np.ndarray, np.ndarray]:
        rho = np.asarray(rho, dtype=float)
        if np.any(rho <= 0):
            raise DomainError("Model map is singular on the axis; need rho > 0")
        V, W = self.evaluate(rho, np.asarray(z, dtype=float))
        return np.asarray(V, dtype=float), np.asarray(W, dtype=float)

    def derivatives(self, rho, z) -> Derivatives2D:
        """Value, gradient and second derivatives of (V_bar, W_bar), stacked on the last axis"""
        rho = np.asarray(rho, dtype=float)
        h = np.minimum(default_step(rho), 0.25 * rho)

        def stacked(r, zz):
            V, W = self.values(r, zz)
            return np.stack([V, W], axis=-1)

        return derivatives_2d(stacked, rho, z, h, order=4)


def _family_evaluator(family, beta_ell: float):
    def evaluate(rho, z):
        G = family.sample_brill(rho, z).G
        _, point = reduce_torus_matrix(G, rho, beta_ell)
        return point.V, point.W
    return evaluate


def _weyl_evaluator(rods: RodDataSet, cls: AsymptoticClass):
    flat = model_for_class(cls)
    ref_rho, ref_z = np.array([1.0]), np.array([0.5])
    _, ref = reduce_torus_matrix(flat.sample_brill(ref_rho, ref_z).G, ref_rho, 0.0)
    shift = float(ref.V[0] - weyl_potential(flat.rod_data(), ref_rho, ref_z)[0])

    def evaluate(rho, z):
        V = weyl_potential(rods, rho, z) + shift
        return V, np.zeros_like(V)
    return evaluate


def z_partition(turning_points, z) -> List[np.ndarray]:
    """
    Smooth partition of unity in z, one weight per turning point

    Weight n is 1 near turning point n and hands over to weight n + 1 on the
    middle half of the finite rod between them.
    """
    zs = list(turning_points)
    z = np.asarray(z, dtype=float)
    steps = []
    for a, b in zip(zs[:-1], zs[1:]):
        width = 0.5 * (b - a)
        steps.append(smooth_step((z - a - 0.5 * width) / width))
    weights = []
    for n in range(len(zs)):
        upper = steps[n - 1] if n > 0 else np.ones_like(z)
        lower = steps[n] if n < len(steps) else np.zeros_like(z)
        weights.append(upper - lower)
    return weights


def blend_radii(rods: RodDataSet, cls: AsymptoticClass) -> Tuple[float, float]:
    """Radii between which the corner blend hands over to the flat model of the class"""
    zs = rods.turning_points
    scale = max(1.0, max(abs(z) for z in zs), zs[-1] - zs[0])
    if cls.tag != 'ALE':
        scale = max(scale, cls.ell)
    return 2.0 * scale, 4.0 * scale


def _blended_evaluator(rods: RodDataSet, cls: AsymptoticClass):
    flat = model_for_class(cls)
    corners = [(rods.structures[n], rods.structures[n + 1], z) for n, z in enumerate(rods.turning_points)]
    inner, outer = blend_radii(rods, cls)

    def evaluate(rho, z):
        rho, z = np.broadcast_arrays(rho, z)
        G = 0.0
        for (below, above, zc), weight in zip(corners, z_partition(rods.turning_points, z)):
            G = G + weight[..., None, None] * corner_matrix(below, above, zc, rho, z)
        far = smooth_step((np.hypot(rho, z) - inner) / (outer - inner))[..., None, None]
        G = (1.0 - far) * G + far * flat.sample_brill(rho, z).G
        _, point = reduce_torus_matrix(G, rho, cls.beta_ell)
        return point.V, point.W
    return evaluate


def build_model_map(rods: RodDataSet, cls: AsymptoticClass, family=None) -> ModelMap:
    """
    Reference map for a rod data set and asymptotic class

    Args:
        rods: Valid rod data set
        cls: Asymptotic class whose semi-infinite rods must match
        family: Exact geometry with the same rods; seeds twisted or case III data

    Returns:
        ModelMap: The reference map
    """
    if not cls.matches(rods):
        first, last = cls.end_structures()
        raise ClassMismatchError(f"Semi-infinite rods {rods.first}, {rods.last} do not match "
                                 f"{cls.label()} (expected {first}, {last})")

    if family is not None:
        if not family.rod_data().same_rods(rods, tol=1e-9):
            raise ClassMismatchError(f"{family.label()} has rods {family.rod_data()}, not {rods}")
        if not same_class(family.asymptotic_class(), cls):
            raise ClassMismatchError(f"{family.label()} is {family.asymptotic_class().label()}, not {cls.label()}")

    diagonal = all(s.as_tuple() in ((1, 0), (-1, 0), (0, 1), (0, -1)) for s in rods.structures)
    if diagonal and cls.beta_ell == 0.0:
        logger.debug(f"Weyl model map for {rods}")
        return ModelMap(rods, cls, _weyl_evaluator(rods, cls), WEYL, family, harmonic=True)

    if family is not None:
        logger.debug(f"Model map from {family.label()}")
        return ModelMap(rods, cls, _family_evaluator(family, cls.beta_ell), f"family:{family.key}", family)

    flat = model_for_class(cls)
    if flat.rod_data().same_rods(rods, tol=1e-12):
        return ModelMap(rods, cls, _family_evaluator(flat, cls.beta_ell), f"family:{flat.key}", flat)

    if not rods.turning_points:
        raise DomainError(f"Rods {rods} have no corner to build a model map from")
    logger.info(f"Blended model map for {rods} ({len(rods.turning_points)} corners, {cls.label()})")
    return ModelMap(rods, cls, _blended_evaluator(rods, cls), BLEND)
