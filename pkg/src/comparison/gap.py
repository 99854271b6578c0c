"""
Theorem Gap

This module implements the mass comparison between a geometry g and the
equilibrium geometry g_o sharing its rod data:

    mass(g) - mass(g_o) >= 2 pi sum_n int (theta^n - theta^n_o) dz,

with equality exactly when g = g_o. The slack of the inequality is
assembled from the mass and defect engines; equality is flagged when the
slack is within the tolerance budget and the two maps agree in the
hyperbolic plane.
"""

import logging
import math
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from src import config
from src.defects import defect_profiles, defect_term
from src.exceptions import ClassMismatchError
from src.families import FamilyParams, build_family, same_class
from src.geometry import h2_distance, reduce_torus_matrix
from src.mass import estimate_mass

logger = logging.getLogger(__name__)

# bulk sample points, in units of the rod extent
SAMPLE_RHO = (0.25, 0.5, 1.0, 2.0, 4.0)
SAMPLE_Z = (-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0)


class TheoremGapReport(BaseModel):
    """Masses, defect term and the slack of the mass inequality"""
    model_config = ConfigDict(extra='forbid')

    geometry: str
    reference: str
    mass_g: float
    mass_o: float
    defect_term: float
    slack: float = Field(description="(mass_g - mass_o) - defect_term")
    tol: float = Field(gt=0, description="absolute tolerance on the slack")
    h2_distance: float = Field(ge=0, description="sup distance between the two maps")
    equality: bool
    diagnostics: Dict[str, Any] = Field(default_factory=dict)


def _as_family(f):
    if isinstance(f, (FamilyParams, dict)):
        return build_family(f)
    return f


def check_comparable(g, g_o) -> None:
    """Refuse comparisons across rod data sets or asymptotic classes"""
    if not same_class(g.asymptotic_class(), g_o.asymptotic_class()):
        raise ClassMismatchError(f"{g.label()} has class {g.asymptotic_class().label()}, "
                                 f"{g_o.label()} has {g_o.asymptotic_class().label()}")
    if not g.rod_data().same_rods(g_o.rod_data(), tol=1e-9):
        raise ClassMismatchError(f"{g.label()} and {g_o.label()} have different rod data: "
                                 f"{g.rod_data()} vs {g_o.rod_data()}")


def sample_points(rods) -> Tuple[np.ndarray, np.ndarray]:
    """Bulk (rho, z) points scaled to the extent of the finite rods"""
    turning = [abs(float(t)) for t in rods.turning_points]
    scale = max(turning + [1.0])
    rho, z = np.meshgrid(np.array(SAMPLE_RHO) * scale, np.array(SAMPLE_Z) * scale, indexing='ij')
    return rho, z


def family_distance(g, g_o) -> float:
    """Sup hyperbolic distance between the maps of two families at bulk points"""
    rho, z = sample_points(g_o.rod_data())
    beta_ell = g_o.asymptotic_class().beta_ell
    _, p = reduce_torus_matrix(g.sample_brill(rho, z).G, rho, beta_ell)
    _, p_o = reduce_torus_matrix(g_o.sample_brill(rho, z).G, rho, beta_ell)
    return float(np.max(h2_distance(p, p_o)))


def field_distance(psi, psi_o) -> float:
    """Sup hyperbolic distance between two solved fields off the axis"""
    psi.check_compatible(psi_o)
    return float(np.max(h2_distance(psi.point(), psi_o.point())))


def theorem_gap(g, g_o, tol: float = config.COMPARISON_TOL, fields: Optional[Sequence] = None,
                radii: Sequence[float] = config.MASS_RADII, all_rods: bool = False) -> TheoremGapReport:
    """
    Slack of the mass inequality between g and its equilibrium geometry

    Args:
        g: Geometry (family or FamilyParams)
        g_o: Equilibrium geometry with the same rod data and class
        tol: Relative tolerance budget; scaled by the size of the masses
        fields: Optional solved (psi, psi_o) whose distance replaces the sampled one
        radii: Model radii of the mass extrapolation
        all_rods: Include the semi-infinite rods in the defect term

    Returns:
        TheoremGapReport: Masses, defect term, slack and the equality flag
    """
    g, g_o = _as_family(g), _as_family(g_o)
    check_comparable(g, g_o)

    estimate_g = estimate_mass(g, radii=radii)
    estimate_o = estimate_mass(g_o, radii=radii)
    profiles_g = defect_profiles(g, finite_only=not all_rods)
    profiles_o = defect_profiles(g_o, finite_only=not all_rods)
    term = defect_term(profiles_g, profiles_o)

    slack = (estimate_g.extrapolated - estimate_o.extrapolated) - term
    scale = max(abs(estimate_g.extrapolated), abs(estimate_o.extrapolated), abs(term), 1.0)
    abs_tol = tol * scale
    if fields is not None:
        distance = field_distance(*fields)
    else:
        distance = family_distance(g, g_o)
    equality = abs(slack) <= abs_tol and distance <= tol

    if slack < -abs_tol:
        logger.warning(f"Negative slack {slack:.10g} beyond tolerance {abs_tol:.3g} "
                       f"for {g.label()} vs {g_o.label()}")
    logger.info(f"Theorem gap {g.label()} vs {g_o.label()}: slack {slack:.12g}, equality {equality}")

    diagnostics = {
        'mass_g': {'radii': estimate_g.radii, 'fluxes': estimate_g.fluxes,
                   'fit_exponent': estimate_g.fit_exponent, 'monotone': estimate_g.monotone},
        'mass_o': {'radii': estimate_o.radii, 'fluxes': estimate_o.fluxes,
                   'fit_exponent': estimate_o.fit_exponent, 'monotone': estimate_o.monotone},
        'defects': [{'rod': a.rod_index, 'start': a.start, 'end': a.end,
                     'integral_g': a.integral, 'integral_o': b.integral}
                    for a, b in zip(profiles_g, profiles_o)],
        'distance_source': 'fields' if fields is not None else 'samples',
    }
    return TheoremGapReport(geometry=g.label(), reference=g_o.label(),
                            mass_g=estimate_g.extrapolated, mass_o=estimate_o.extrapolated,
                            defect_term=term, slack=slack, tol=abs_tol, h2_distance=distance,
                            equality=equality, diagnostics=diagnostics)


def bold_mass(f, profiles=None, mass: Optional[float] = None) -> float:
    """
    Mass minus 2 pi times the integrated defects of the finite rods

    Args:
        f: Family or FamilyParams
        profiles: Defect profiles of the finite rods; computed when omitted
        mass: Mass to use; defaults to the family's closed form

    Returns:
        float: The bold mass
    """
    family = _as_family(f)
    if profiles is None:
        profiles = defect_profiles(family, finite_only=True)
    if mass is None:
        mass = family.exact_mass()
    integrated = sum(p.integral for p in profiles if p.is_finite)
    value = mass - 2 * math.pi * integrated
    logger.debug(f"Bold mass of {family.label()}: {value:.12g}")
    return value
