"""
Defect Profiles

This module implements defect profiles along axis rods and the integrated
defect term 2 pi sum_n int_{rod n} (theta^n - theta^n_o) dz.

Finite rods use a Gauss-Legendre rule. Semi-infinite rods are truncated at
|z| = DEFECT_TAIL_CUTOFF on geometric segments; they enter the defect term
only when the difference of the two profiles decays faster than 1/|z|.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from src import config
from src.defects.angles import angle_defect_at, rod_case
from src.exceptions import ClassMismatchError, ConvergenceError, DomainError
from src.rods import Rod, RodDataSet
from src.utils.numerics import composite_gauss, gauss_legendre

logger = logging.getLogger(__name__)

# semi-infinite rods: offsets from the finite end, in units of the cutoff
TAIL_EDGES = (0.0, 1e-3, 1e-2, 1e-1, 1.0)


@dataclass
class DefectProfile:
    """Angle defect sampled at quadrature nodes of one rod"""
    rod_index: int
    start: float
    end: float
    samples: List[Tuple[float, float]]  # (z, theta)
    weights: List[float] = field(repr=False, default_factory=list)
    integral: float = 0.0
    case: str = ''

    def __post_init__(self):
        for z, _ in self.samples:
            if not self.start < z < self.end:
                raise DomainError(f"Profile sample z={z} lies outside rod {self.rod_index}")

    @property
    def is_finite(self) -> bool:
        return math.isfinite(self.start) and math.isfinite(self.end)

    @property
    def z(self) -> np.ndarray:
        return np.array([s[0] for s in self.samples])

    @property
    def theta(self) -> np.ndarray:
        return np.array([s[1] for s in self.samples])

    def to_dict(self) -> Dict:
        return {'rod': self.rod_index, 'start': self.start, 'end': self.end,
                'integral': self.integral, 'case': self.case}


def rod_nodes(rod: Rod, quad_points: int = config.DEFECT_QUAD_POINTS,
              cutoff: float = config.DEFECT_TAIL_CUTOFF) -> Tuple[np.ndarray, np.ndarray]:
    """
    Quadrature nodes and weights on a rod

    Args:
        rod: Axis rod
        quad_points: Gauss points on a finite rod
        cutoff: Truncation of semi-infinite rods

    Returns:
        tuple: (nodes, weights)
    """
    if rod.is_finite:
        return gauss_legendre(quad_points, rod.start, rod.end)
    if math.isinf(rod.start) and math.isinf(rod.end):
        # single rod: the whole axis, split at 0
        left, w_left = rod_nodes(Rod(rod.index, rod.structure, -math.inf, 0.0), quad_points, cutoff)
        right, w_right = rod_nodes(Rod(rod.index, rod.structure, 0.0, math.inf), quad_points, cutoff)
        return np.concatenate([left, right]), np.concatenate([w_left, w_right])
    per_segment = max(4, quad_points // (len(TAIL_EDGES) - 1))
    offsets, weights = composite_gauss([cutoff * e for e in TAIL_EDGES], per_segment)
    if math.isinf(rod.end):
        return rod.start + offsets, weights
    return (rod.end - offsets)[::-1], weights[::-1]


def defect_profile(source, rod: Rod, quad_points: int = config.DEFECT_QUAD_POINTS,
                   beta_ell: Optional[float] = None) -> DefectProfile:
    """
    Sample the angle defect along one rod

    Args:
        source: Family, Brill sampler or FieldDump
        rod: Axis rod
        quad_points: Gauss points on a finite rod
        beta_ell: Twist constant; defaults to the source's

    Returns:
        DefectProfile: Samples and the quadrature of the defect
    """
    z, weights = rod_nodes(rod, quad_points)
    theta = np.atleast_1d(angle_defect_at(source, rod, z, beta_ell))
    integral = float(np.sum(weights * theta))
    case = rod_case(rod.structure, beta_ell if beta_ell is not None else _source_beta_ell(source))
    logger.debug(f"Rod {rod.index} {rod.structure}: int theta dz = {integral:.12g}")
    return DefectProfile(rod_index=rod.index, start=rod.start, end=rod.end,
                         samples=list(zip(z.tolist(), theta.tolist())), weights=weights.tolist(),
                         integral=integral, case=case)


def _source_beta_ell(source) -> float:
    if hasattr(source, 'asymptotic_class'):
        return source.asymptotic_class().beta_ell
    if hasattr(source, 'beta') and hasattr(source, 'ell'):
        return float(source.beta) * float(source.ell)
    return config.BETA_ZERO


def defect_profiles(source, rods: Optional[RodDataSet] = None,
                    quad_points: int = config.DEFECT_QUAD_POINTS,
                    finite_only: bool = False) -> List[DefectProfile]:
    """Profiles for every rod (or every finite rod) of a rod data set"""
    rods = rods if rods is not None else source.rod_data()
    selected = rods.finite_rods if finite_only else rods.rods
    workers = min(config.THREADS, max(1, len(selected)))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        profiles = list(pool.map(lambda rod: defect_profile(source, rod, quad_points), selected))
    return sorted(profiles, key=lambda p: p.rod_index)


def tail_is_integrable(z: np.ndarray, difference: np.ndarray, floor: float = 1e-9) -> bool:
    """
    Decide from the outer samples whether a difference decays faster than 1/|z|

    Args:
        z: Sample positions along a semi-infinite rod
        difference: Defect difference at the samples
        floor: Differences below this are treated as zero

    Returns:
        bool: True for an integrable tail
    """
    distance = np.abs(z)
    order = np.argsort(distance)
    distance, difference = distance[order], np.abs(difference[order])
    outer = distance >= distance[-1] * 1e-2
    if np.all(difference[outer] <= floor):
        return True
    mask = outer & (difference > floor)
    if np.count_nonzero(mask) < 3:
        return False
    slope = np.polyfit(np.log(distance[mask]), np.log(difference[mask]), 1)[0]
    logger.debug(f"Defect tail decays like |z|^{slope:.3f}")
    return slope < -1.0


def _check_match(g_profiles: Sequence[DefectProfile], o_profiles: Sequence[DefectProfile]) -> None:
    if len(g_profiles) != len(o_profiles):
        raise ClassMismatchError(f"Profile sets cover {len(g_profiles)} and {len(o_profiles)} rods")
    for a, b in zip(g_profiles, o_profiles):
        if (a.rod_index, a.start, a.end) != (b.rod_index, b.start, b.end):
            raise ClassMismatchError(f"Rod {a.rod_index} [{a.start:g}, {a.end:g}] does not match "
                                     f"rod {b.rod_index} [{b.start:g}, {b.end:g}]")
        if len(a.samples) != len(b.samples) or not np.allclose(a.z, b.z, rtol=0, atol=1e-12):
            raise ClassMismatchError(f"Rod {a.rod_index} profiles use different nodes")


def defect_term(g_profiles: Sequence[DefectProfile], o_profiles: Sequence[DefectProfile]) -> float:
    """
    2 pi sum_n int (theta^n - theta^n_o) dz over matching rods

    Args:
        g_profiles: Profiles of the geometry
        o_profiles: Profiles of the reference, same rods and nodes

    Returns:
        float: The defect term
    """
    _check_match(g_profiles, o_profiles)
    total = 0.0
    for a, b in zip(g_profiles, o_profiles):
        difference = a.theta - b.theta
        if not a.is_finite and not tail_is_integrable(a.z, difference):
            raise ConvergenceError(f"Defect difference on semi-infinite rod {a.rod_index} is not integrable",
                                   {'rod': a.rod_index, 'z': a.z.tolist(), 'difference': difference.tolist()})
        total += float(np.sum(np.asarray(a.weights) * difference))
    return 2 * math.pi * total


def rn_defect_difference(M: float, c1: float) -> float:
    """
    theta_RN - theta_S on the bolt rod for a shared period

    The Schwarzschild partner has mass d = sqrt(M^2 - c1); the difference is
    2 log((M + d) / (2 d)) whatever the common period.
    """
    if c1 >= M ** 2:
        raise DomainError(f"Reissner-Nordstrom needs c1 < M^2, got M={M}, c1={c1}")
    d = math.sqrt(M ** 2 - c1)
    if M + d <= 0:
        raise DomainError(f"Reissner-Nordstrom needs r_plus = M + d > 0, got M={M}, c1={c1}")
    return 2 * math.log((M + d) / (2 * d))
