"""
Angle Defects

This module implements the logarithmic angle defect on an axis rod,

    theta = lim_{rho -> 0} 1/2 log(rho^2 e^{2 alpha} / G(v, v)),

where v is the rod vector. The limit is evaluated twice and cross-checked:
once directly from G(v, v) and once through the regularity identity in the
reduced fields,

    -2 alpha + Z = log rho - log Phi(v, v) - 2 theta,

where Phi(v, v) is written in the Fermi coordinates (V, W) of the case the
rod falls into (I: v = (1, 0), II: v = (0, 1) untwisted or twisted, III:
anything else). Both limits use Richardson extrapolation over the rho
schedule in config.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from src import config
from src.exceptions import ConvergenceError, DomainError, RodDataError
from src.geometry.curvature import sample
from src.geometry.field_io import FieldDump
from src.geometry.reduction import HyperbolicPoint, phi_from_point, reduce_torus_matrix
from src.rods import Rod, RodStructure
from src.utils.numerics import richardson_extrapolate

logger = logging.getLogger(__name__)

CASES = ('I', 'II_0', 'II_beta', 'III')


@dataclass
class DefectEstimate:
    """Both evaluations of the defect at axis points"""
    z: np.ndarray
    direct: np.ndarray
    identity: np.ndarray
    case: str
    spread: float = 0.0  # disagreement of the coarse and fine two-sample extrapolations

    @property
    def gap(self) -> float:
        return float(np.max(np.abs(self.direct - self.identity))) if self.z.size else 0.0


def rod_case(structure: RodStructure, beta_ell: float = config.BETA_ZERO) -> str:
    """
    Classify a rod vector for the regularity identities

    Args:
        structure: Rod vector
        beta_ell: Twist constant of the end

    Returns:
        str: 'I', 'II_0', 'II_beta' or 'III'
    """
    if not structure.is_valid:
        raise RodDataError(f"Cannot classify rod {structure}: {'; '.join(structure.problems())}")
    v = structure.as_tuple()
    if v in ((1, 0), (-1, 0)):
        return 'I'
    if v in ((0, 1), (0, -1)):
        return 'II_0' if beta_ell == config.BETA_ZERO else 'II_beta'
    return 'III'


def phi_norm(case: str, point: HyperbolicPoint, v: Sequence[int], beta_ell: float) -> np.ndarray:
    """Phi(v, v) in Fermi coordinates for a rod case"""
    b = beta_ell
    ev = np.exp(point.V)
    ch = np.cosh(point.W)
    if case == 'I':
        return ev * ch
    if case == 'II_0':
        return np.exp(-point.V) * ch
    if case == 'II_beta':
        return (np.exp(-point.V) + b * b * ev) * ch + 2 * b * np.sinh(point.W)
    if case == 'III':
        phi = phi_from_point(point, b)
        v1, v2 = v
        return v1 * v1 * phi[..., 0, 0] + 2 * v1 * v2 * phi[..., 0, 1] + v2 * v2 * phi[..., 1, 1]
    raise RodDataError(f"Unknown rod case {case!r}")


def _beta_ell(source, beta_ell: Optional[float]) -> float:
    if beta_ell is not None:
        return float(beta_ell)
    if isinstance(source, FieldDump):
        return float(source.beta) * float(source.ell)
    if hasattr(source, 'asymptotic_class'):
        return source.asymptotic_class().beta_ell
    return config.BETA_ZERO


def _check_interior(rod: Rod, z: np.ndarray) -> None:
    if not np.all((z > rod.start) & (z < rod.end)):
        raise DomainError(f"Defect points must lie strictly inside rod {rod.index} [{rod.start:g}, {rod.end:g}]")


def rho_schedule(rod: Rod, z: np.ndarray, samples: Sequence[float] = config.DEFECT_RHO_SAMPLES) -> np.ndarray:
    """
    Axis distances used for the rho -> 0 limit

    The schedule shrinks with the distance to the nearest rod end so that
    rho stays small against it near corners.

    Returns:
        np.ndarray: shape (len(samples),) + z.shape
    """
    ends = np.minimum(np.abs(z - rod.start), np.abs(rod.end - z))
    factor = np.minimum(1.0, ends)
    return np.asarray(samples, dtype=float).reshape((-1,) + (1,) * z.ndim) * factor


def limit_schedule(source) -> Tuple[Tuple[float, ...], float]:
    """
    rho samples and correction order for the rho -> 0 limit of a source

    Closed-form geometries and their smooth perturbations have Brill data
    even in rho, so their corrections start at rho^2 and a coarser schedule
    keeps g(v, v) ~ rho^2 clear of cancellation. Anything else gets the
    generic O(rho^zeta) schedule.
    """
    if getattr(source, 'smooth_axis', False):
        return tuple(config.DEFECT_EVEN_RHO_SAMPLES), 2.0
    return tuple(config.DEFECT_RHO_SAMPLES), config.DEFECT_ZETA


def _pre_limits(source, rod: Rod, rho: np.ndarray, z: np.ndarray, case: str,
                beta_ell: float) -> Tuple[np.ndarray, np.ndarray]:
    v = rod.structure.as_tuple()
    s = sample(source, rho, z)
    if hasattr(source, 'torus_norm'):
        g_vv = source.torus_norm(v, rho, z)
    else:
        g_vv = np.einsum('i,...ij,j->...', np.asarray(v, dtype=float), s.G, np.asarray(v, dtype=float))
    direct = 0.5 * (2 * np.log(rho) + 2 * s.alpha - np.log(g_vv))
    fields, point = reduce_torus_matrix(s.G, rho, beta_ell)
    identity = 0.5 * (np.log(rho) - np.log(phi_norm(case, point, v, beta_ell)) + 2 * s.alpha - fields.Z)
    return direct, identity


def _field_limits(fields: FieldDump, rod: Rod, z: np.ndarray, case: str,
                  beta_ell: float) -> Tuple[np.ndarray, np.ndarray]:
    """Extrapolate the identity from the three grid lines closest to the axis"""
    rho = np.asarray(fields.rho, dtype=float)
    if rho.ndim != 2:
        raise DomainError("Field defects need a two dimensional (rho, z) grid")
    rows = [i for i in range(rho.shape[0]) if rho[i, 0] > 0][:3]
    if len(rows) < 3:
        raise DomainError("Field defects need three grid lines off the axis")
    grid_z = np.asarray(fields.z, dtype=float)[0]
    v = rod.structure.as_tuple()
    lines_rho, lines_direct, lines_identity = [], [], []
    for i in rows:
        V = np.interp(z, grid_z, fields.V[i])
        W = np.interp(z, grid_z, fields.W[i])
        Z = np.interp(z, grid_z, fields.Z[i])
        alpha = np.interp(z, grid_z, fields.alpha[i])
        point = HyperbolicPoint(V, W)
        phi = phi_from_point(point, beta_ell)
        v1, v2 = v
        phi_vv = v1 * v1 * phi[..., 0, 0] + 2 * v1 * v2 * phi[..., 0, 1] + v2 * v2 * phi[..., 1, 1]
        r = rho[i, 0]
        # G(v, v) = rho e^Z Phi(v, v)
        lines_direct.append(0.5 * (2 * math.log(r) + 2 * alpha - (math.log(r) + Z + np.log(phi_vv))))
        lines_identity.append(0.5 * (math.log(r) - np.log(phi_norm(case, point, v, beta_ell)) + 2 * alpha - Z))
        lines_rho.append(r)
    # quadratic through the three lines, evaluated at rho = 0
    coeffs_d = np.polyfit(lines_rho, np.stack(lines_direct).reshape(3, -1), 2)
    coeffs_i = np.polyfit(lines_rho, np.stack(lines_identity).reshape(3, -1), 2)
    return coeffs_d[-1].reshape(z.shape), coeffs_i[-1].reshape(z.shape)


def defect_estimate(source, rod: Rod, z, beta_ell: Optional[float] = None,
                    samples: Optional[Sequence[float]] = None,
                    zeta: Optional[float] = None) -> DefectEstimate:
    """
    Evaluate the angle defect at interior points of a rod both ways

    Args:
        source: Family, Brill sampler or FieldDump
        rod: Axis rod
        z: Points strictly inside the rod
        beta_ell: Twist constant; defaults to the source's
        samples: Decreasing rho schedule with constant ratio; defaults to limit_schedule
        zeta: Order of the leading rho correction; defaults to limit_schedule

    Returns:
        DefectEstimate: Direct and identity limits
    """
    z = np.atleast_1d(np.asarray(z, dtype=float))
    _check_interior(rod, z)
    b = _beta_ell(source, beta_ell)
    case = rod_case(rod.structure, b)

    if isinstance(source, FieldDump):
        direct, identity = _field_limits(source, rod, z, case, b)
        return DefectEstimate(z=z, direct=direct, identity=identity, case=case)

    default_samples, default_zeta = limit_schedule(source)
    samples = default_samples if samples is None else samples
    zeta = default_zeta if zeta is None else zeta
    if len(samples) < 2:
        raise DomainError("The rho schedule needs at least two samples")
    ratio = samples[0] / samples[1]
    rhos = rho_schedule(rod, z, samples)
    pairs = [_pre_limits(source, rod, rho, z, case, b) for rho in rhos]
    direct = richardson_extrapolate([p[0] for p in pairs], zeta, ratio)
    identity = richardson_extrapolate([p[1] for p in pairs], zeta, ratio)
    coarse = richardson_extrapolate([pairs[0][0], pairs[1][0]], zeta, ratio)
    fine = richardson_extrapolate([pairs[-2][0], pairs[-1][0]], zeta, ratio)
    spread = float(np.max(np.abs(np.asarray(fine) - np.asarray(coarse))))
    return DefectEstimate(z=z, direct=np.atleast_1d(direct), identity=np.atleast_1d(identity),
                          case=case, spread=spread)


def angle_defect_at(source, rod: Rod, z: Union[float, np.ndarray], beta_ell: Optional[float] = None,
                    tol: float = config.DEFECT_AGREEMENT_TOL):
    """
    Logarithmic angle defect at interior points of an axis rod

    Args:
        source: Family, Brill sampler or FieldDump
        rod: Axis rod
        z: Point (or points) strictly inside the rod
        beta_ell: Twist constant; defaults to the source's
        tol: Allowed disagreement between the two evaluations

    Returns:
        float or np.ndarray: The defect, shaped like z
    """
    estimate = defect_estimate(source, rod, z, beta_ell)
    if not estimate.gap <= tol:
        raise ConvergenceError(
            f"Angle defect on rod {rod.index} {rod.structure}: direct and case {estimate.case} "
            f"evaluations differ by {estimate.gap:.3e}",
            {'rod': rod.index, 'case': estimate.case, 'gap': estimate.gap,
             'direct': estimate.direct.tolist(), 'identity': estimate.identity.tolist()})
    if not estimate.spread <= config.DEFECT_LIMIT_TOL:
        raise ConvergenceError(
            f"Angle defect on rod {rod.index} {rod.structure} does not settle as rho -> 0 "
            f"(spread {estimate.spread:.3e}); wrong rod structure or a non-conical singularity",
            {'rod': rod.index, 'case': estimate.case, 'spread': estimate.spread})
    logger.debug(f"Rod {rod.index} case {estimate.case}: defect gap {estimate.gap:.3e}")
    if np.ndim(z) == 0:
        return float(estimate.direct[0])
    return estimate.direct


def axis_identity_difference(g, g_o, rod: Rod, z, beta_ell: Optional[float] = None,
                             samples: Optional[Sequence[float]] = None,
                             zeta: Optional[float] = None) -> np.ndarray:
    """
    Limit of -2(alpha - alpha_o) + (Z - Z_o) + log(Phi(v, v) / Phi_o(v, v)) on a rod

    The limit equals -2 (theta - theta_o) for two geometries sharing the rod.
    """
    z = np.atleast_1d(np.asarray(z, dtype=float))
    _check_interior(rod, z)
    b = _beta_ell(g, beta_ell)
    case = rod_case(rod.structure, b)
    v = rod.structure.as_tuple()
    if samples is None or zeta is None:
        # the coarser schedule only when both geometries have smooth axes
        smooth = getattr(g, 'smooth_axis', False) and getattr(g_o, 'smooth_axis', False)
        default_samples, default_zeta = limit_schedule(g if smooth else None)
        samples = default_samples if samples is None else samples
        zeta = default_zeta if zeta is None else zeta

    values = []
    for rho in rho_schedule(rod, z, samples):
        s, s_o = sample(g, rho, z), sample(g_o, rho, z)
        fields, point = reduce_torus_matrix(s.G, rho, b)
        fields_o, point_o = reduce_torus_matrix(s_o.G, rho, b)
        ratio = phi_norm(case, point, v, b) / phi_norm(case, point_o, v, b)
        values.append(-2 * (s.alpha - s_o.alpha) + (fields.Z - fields_o.Z) + np.log(ratio))
    return np.atleast_1d(richardson_extrapolate(values, zeta, samples[0] / samples[1]))
