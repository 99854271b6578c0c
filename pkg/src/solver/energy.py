"""
Harmonic and Reduced Energies

This module implements the energies of solver fields on axis-avoiding
regions Omega: the harmonic energy 1/2 (cosh^2 W |grad V|^2 + |grad W|^2)
integrated against 2 pi rho drho dz, the reduced energy of a map against a
harmonic reference map over a margin schedule, and the sixth-power distance
integral that accompanies it in the convexity estimate.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from src import config
from src.exceptions import DomainError
from src.geometry.hyperbolic import h2_distance, h2_energy_density
from src.geometry.reduction import HyperbolicPoint
from src.rods import RodDataSet
from src.solver.field import HyperbolicField
from src.solver.model_map import ModelMap
from src.solver.relax import HarmonicMapOperator, residual_norm

logger = logging.getLogger(__name__)

_EPS = 1e-9


@dataclass(frozen=True)
class Margins:
    """Cutoffs of Omega: distance to the axis, corner size and outer radius"""
    sigma1: float
    sigma2: float
    outer_radius: float

    def __post_init__(self):
        if self.sigma1 <= 0 or self.sigma2 <= 0 or self.outer_radius <= 0:
            raise DomainError(f"Margins must be positive, got {self}")


def default_margins() -> List[Margins]:
    return [Margins(s1, s2, r) for s1, s2, r in
            zip(config.SIGMA1_SCHEDULE, config.SIGMA2_SCHEDULE, config.OUTER_RADIUS_SCHEDULE)]


@dataclass(frozen=True)
class Region:
    """
    Part of the half-plane kept away from the axis

    Corner disks have radius corner_radius about each turning point; the
    outer radius is measured from the origin in (rho, z).
    """
    rho_min: float
    rho_max: float = np.inf
    z_min: float = -np.inf
    z_max: float = np.inf
    outer_radius: float = np.inf
    corners: Tuple[float, ...] = ()
    corner_radius: float = 0.0

    def __post_init__(self):
        if not self.rho_min > 0:
            raise DomainError(f"Region touches the axis (rho_min = {self.rho_min}); the energy diverges there")
        if self.rho_max <= self.rho_min or self.z_max <= self.z_min:
            raise DomainError(f"Empty region {self}")

    def contains(self, rho, z) -> np.ndarray:
        rho = np.asarray(rho, dtype=float)
        z = np.asarray(z, dtype=float)
        inside = ((rho >= self.rho_min - _EPS) & (rho <= self.rho_max + _EPS)
                  & (z >= self.z_min - _EPS) & (z <= self.z_max + _EPS)
                  & (np.hypot(rho, z) <= self.outer_radius))
        for zc in self.corners:
            inside &= np.hypot(rho, z - zc) >= self.corner_radius
        return inside


def sigma_region(rods: RodDataSet, margins: Margins) -> Region:
    """Omega for one set of margins: rho > sigma1, corner disks of radius sigma2^2 / 2"""
    return Region(rho_min=margins.sigma1, outer_radius=margins.outer_radius,
                  corners=tuple(rods.turning_points), corner_radius=0.5 * margins.sigma2 ** 2)


def _trapezoid_weights(x: np.ndarray, lo: float, hi: float) -> np.ndarray:
    w = np.zeros_like(x)
    idx = np.nonzero((x >= lo - _EPS) & (x <= hi + _EPS))[0]
    if idx.size < 2:
        return w
    d = np.diff(x[idx])
    w[idx[:-1]] += 0.5 * d
    w[idx[1:]] += 0.5 * d
    return w


def quadrature_weights(fld: HyperbolicField, region: Region) -> np.ndarray:
    """Trapezoid weights times 2 pi rho on the grid, zero outside the region"""
    grid = fld.grid
    wr = _trapezoid_weights(grid.rho, region.rho_min, region.rho_max)
    wz = _trapezoid_weights(grid.z, region.z_min, region.z_max)
    rho, z = grid.mesh()
    return 2 * np.pi * rho * np.outer(wr, wz) * region.contains(rho, z)


def _gradients(fld: HyperbolicField, rows: np.ndarray):
    """grad V, grad W and W on the selected rows (none of them the axis)"""
    grid = fld.grid
    rho, z = grid.mesh()
    D = fld.model.derivatives(rho[rows], z[rows])
    du_r, du_z = np.gradient(fld.u, grid.rho, grid.z, edge_order=2)
    dw_r, dw_z = np.gradient(fld.w, grid.rho, grid.z, edge_order=2)
    grad_v = np.stack([D.d_rho[..., 0] + du_r[rows], D.d_z[..., 0] + du_z[rows]], axis=-1)
    grad_w = np.stack([D.d_rho[..., 1] + dw_r[rows], D.d_z[..., 1] + dw_z[rows]], axis=-1)
    return grad_v, grad_w, D.value[..., 1] + fld.w[rows]


def energy(fld: HyperbolicField, region: Region) -> float:
    """
    Harmonic energy of a field over an axis-avoiding region

    Args:
        fld: Solver field
        region: Omega, with rho_min > 0

    Returns:
        float: 2 pi times the integral of 1/2 (cosh^2 W |grad V|^2 + |grad W|^2) rho drho dz
    """
    weights = quadrature_weights(fld, region)
    rows = np.nonzero(weights.any(axis=1))[0]
    if rows.size == 0:
        return 0.0
    grad_v, grad_w, W = _gradients(fld, rows)
    density = 0.5 * h2_energy_density(grad_v, grad_w, W)
    return float(np.sum(weights[rows] * density))


def rebase(fld: HyperbolicField, model: ModelMap) -> HyperbolicField:
    """The same map written as differences from another model with the same rods"""
    if fld.model is model:
        return fld
    p = fld.point()
    rho, z = fld.grid.mesh()
    V_bar, W_bar = model.values(rho[1:], z[1:])
    u = np.zeros(fld.grid.shape)
    w = np.zeros(fld.grid.shape)
    u[1:] = p.V - V_bar
    w[1:] = p.W - W_bar
    return HyperbolicField(fld.grid, model, u, w)


@dataclass
class ReducedEnergyReport:
    """Reduced energy over a margin schedule and its trend-fit limit"""
    margins: List[Margins]
    values: List[float]
    limit: float
    diagnostics: Dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            'margins': [{'sigma1': m.sigma1, 'sigma2': m.sigma2, 'outer_radius': m.outer_radius}
                        for m in self.margins],
            'values': list(self.values),
            'limit': self.limit,
            'diagnostics': dict(self.diagnostics),
        }


def _check_reference(psi: HyperbolicField, psi_o: HyperbolicField) -> HyperbolicField:
    psi.check_compatible(psi_o)
    res = residual_norm(psi_o)
    if res > config.SOLVER_HARMONIC_TOL:
        raise DomainError(f"Reference map is not harmonic: residual {res:.3e} > {config.SOLVER_HARMONIC_TOL:.0e}")
    return rebase(psi, psi_o.model)


def reduced_energy(psi: HyperbolicField, psi_o: HyperbolicField,
                   margins: Optional[Sequence[Margins]] = None) -> ReducedEnergyReport:
    """
    Reduced energy of psi against the harmonic map psi_o

    On each Omega the value is the discrete energy functional of psi minus
    that of psi_o, both measured against the same model map and restricted
    to the grid edges inside Omega. The limit is the intercept of a linear
    fit in sigma1.

    Args:
        psi: Field sharing the grid and rod data of psi_o
        psi_o: Discrete harmonic map (residual <= SOLVER_HARMONIC_TOL)
        margins: Decreasing margin schedule; defaults to the configured one

    Returns:
        ReducedEnergyReport: Values per margin set and their limit
    """
    margins = list(margins) if margins is not None else default_margins()
    psi = _check_reference(psi, psi_o)
    op = HarmonicMapOperator(psi_o)
    rho_e, z_e = op.edge_energies(psi.u, psi.w)
    rho_e_o, z_e_o = op.edge_energies(psi_o.u, psi_o.w)
    d_rho = rho_e - rho_e_o
    d_z = z_e - z_e_o
    d_lin = (psi.u - psi_o.u) * op.lin_V + (psi.w - psi_o.w) * op.lin_W

    rho, z = psi.grid.mesh()
    values = []
    for m in margins:
        inside = sigma_region(psi.model.rods, m).contains(rho, z)
        value = (np.sum(np.where(inside[:-1] & inside[1:], d_rho, 0.0))
                 + np.sum(np.where(inside[1:, :-1] & inside[1:, 1:], d_z, 0.0))
                 - np.sum(np.where(inside & op.free, d_lin, 0.0)))
        values.append(float(value))
        logger.debug(f"Reduced energy at sigma1={m.sigma1:g}, sigma2={m.sigma2:g}: {value:.12g}")

    if len(values) >= 2:
        limit = float(np.polyfit([m.sigma1 for m in margins], values, 1)[1])
    else:
        limit = values[0]
    return ReducedEnergyReport(margins, values, limit, {'spread': float(np.ptp(values))})


def _cell_integrals(rho: np.ndarray, z: np.ndarray, g: np.ndarray) -> np.ndarray:
    corners = g[:-1, :-1] + g[1:, :-1] + g[:-1, 1:] + g[1:, 1:]
    return 0.25 * np.outer(np.diff(rho), np.diff(z)) * corners


def _distance_density(grid_rho, grid_z, model: ModelMap, u, w, u_o, w_o):
    """2 pi rho dist^6 on a grid, zero on the axis row"""
    rho, z = np.meshgrid(grid_rho, grid_z, indexing='ij')
    V_bar, W_bar = model.values(rho[1:], z[1:])
    d = h2_distance(HyperbolicPoint(V_bar + u[1:], W_bar + w[1:]),
                    HyperbolicPoint(V_bar + u_o[1:], W_bar + w_o[1:]))
    out = np.zeros(rho.shape)
    out[1:] = 2 * np.pi * rho[1:] * d ** 6
    return out, d


def distance_integral(psi: HyperbolicField, psi_o: HyperbolicField) -> float:
    """
    Integral of dist^6 between two fields over the grid

    Cells whose corner distances exceed half the maximum are integrated on
    a twice finer subgrid with linearly interpolated differences.
    """
    psi.check_compatible(psi_o)
    psi = rebase(psi, psi_o.model)
    grid = psi.grid
    g, d = _distance_density(grid.rho, grid.z, psi_o.model, psi.u, psi.w, psi_o.u, psi_o.w)
    peak = float(np.max(d))
    if peak == 0.0:
        return 0.0

    cells = _cell_integrals(grid.rho, grid.z, g)
    dist = np.zeros(grid.shape)
    dist[1:] = d
    corner_max = np.maximum.reduce([dist[:-1, :-1], dist[1:, :-1], dist[:-1, 1:], dist[1:, 1:]])
    flagged = corner_max > 0.5 * peak

    fine = grid.refined()
    points = np.stack(fine.mesh(), axis=-1)
    interp = [RegularGridInterpolator((grid.rho, grid.z), a, method='linear')(points)
              for a in (psi.u, psi.w, psi_o.u, psi_o.w)]
    g_fine, _ = _distance_density(fine.rho, fine.z, psi_o.model, *interp)
    fine_cells = _cell_integrals(fine.rho, fine.z, g_fine)
    n_rho, n_z = cells.shape
    fine_cells = fine_cells.reshape(n_rho, 2, n_z, 2).sum(axis=(1, 3))

    logger.debug(f"dist^6 integral refined on {int(flagged.sum())} of {flagged.size} cells")
    return float(np.sum(np.where(flagged, fine_cells, cells)))


def convexity_gap_check(psi: HyperbolicField, psi_o: HyperbolicField,
                        margins: Optional[Sequence[Margins]] = None) -> Tuple[float, float]:
    """
    Both sides of the convexity estimate for the reduced energy

    Returns:
        tuple: (reduced energy limit, (integral of dist^6)^(1/3))
    """
    report = reduced_energy(psi, psi_o, margins)
    rhs = distance_integral(psi, psi_o) ** (1.0 / 3.0)
    logger.info(f"Convexity check: reduced energy {report.limit:.6g}, dist^6 term {rhs:.6g}")
    return report.limit, rhs
