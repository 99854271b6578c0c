"""
Harmonic Map Relaxation

This module implements the discrete harmonic map operator and its
nonlinear Gauss-Seidel relaxation. The map is written as differences
(u, w) from a model map (V_bar, W_bar), and the discrete functional

    J(u, w) = sum over edges of 1/2 A_e [sinh^2 W_e dV_e^2 - sinh^2 W_bar_e dV_bar_e^2
                                          + du_e^2 + dw_e^2]
              - sum over nodes of (u L_V + w L_W)

is the reduced energy of (V, W) against the model; L_V and L_W are the
discrete flat-space divergences of the model gradients. Its gradient is
the finite volume form of

    div(cosh^2 W grad V) = 0,    Delta W - sinh W cosh W |grad V|^2 = 0

with the flat three dimensional operators, and the singular model flux
through the axis is carried by L_V, L_W. A flat-harmonic model (W_bar = 0)
has no net flux out of any cell, so its L_V and L_W vanish and the model
itself is a discrete solution. Each red or black half-sweep takes damped
2x2 Newton steps per node and backtracks until the node's share of J does
not increase, so J never increases from sweep to sweep.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from src import config
from src.exceptions import ConvergenceError
from src.solver.field import TIE_U, TIE_W, HyperbolicField, SolverDiagnostics
from src.solver.grid import SolverConfig

logger = logging.getLogger(__name__)

BACKTRACK_STEPS = 30
ROUNDING_ULPS = 64
MODEL_MATCH = 1e-8  # relative agreement of realized and predicted node decrease


@dataclass
class EdgeSet:
    """Weights and model data of one family of edges"""
    A: np.ndarray
    L: np.ndarray
    gV: np.ndarray
    gW: np.ndarray
    WB: np.ndarray

    def __post_init__(self):
        self.inv_L = 1.0 / self.L
        self.A_L = self.A * self.inv_L
        self.A_L2 = self.A_L * self.inv_L
        self.const = 0.5 * self.A * np.sinh(self.WB) ** 2 * self.gV ** 2


@dataclass
class EdgeTerms:
    """Energy, and first and second derivatives at both ends, of a family of edges"""
    energy: np.ndarray
    gu: Tuple[np.ndarray, np.ndarray]
    gw: Tuple[np.ndarray, np.ndarray]
    huu: Optional[Tuple[np.ndarray, np.ndarray]] = None
    huw: Optional[Tuple[np.ndarray, np.ndarray]] = None
    hww: Optional[Tuple[np.ndarray, np.ndarray]] = None


class HarmonicMapOperator:
    """
    Edge weights and model data of the discrete functional on one grid

    rho edges join rows i and i + 1 (the first one starts on the axis);
    z edges join columns j and j + 1 on the rows off the axis.
    """

    def __init__(self, fld: HyperbolicField):
        grid = fld.grid
        self.grid = grid
        self.kinds = fld.kinds
        rho, z = grid.rho, grid.z
        dz = grid.z_widths

        rho_face = 0.5 * (rho[:-1] + rho[1:])
        fr, fz = np.meshgrid(rho_face, z, indexing='ij')
        D = fld.model.derivatives(fr, fz)
        self.rho_edges = EdgeSet(A=2 * np.pi * (rho_face * np.diff(rho))[:, None] * dz[None, :],
                                 L=np.diff(rho)[:, None],
                                 gV=D.d_rho[..., 0], gW=D.d_rho[..., 1], WB=D.value[..., 1])

        z_face = 0.5 * (z[:-1] + z[1:])
        gr, gz = np.meshgrid(rho[1:], z_face, indexing='ij')
        D = fld.model.derivatives(gr, gz)
        self.z_edges = EdgeSet(A=2 * np.pi * (rho[1:] * grid.rho_widths[1:])[:, None] * np.diff(z)[None, :],
                               L=np.diff(z)[None, :],
                               gV=D.d_z[..., 0], gW=D.d_z[..., 1], WB=D.value[..., 1])

        if fld.model.harmonic:
            self.lin_V = np.zeros(grid.shape)
            self.lin_W = np.zeros(grid.shape)
        else:
            r, s = self.rho_edges, self.z_edges
            self.lin_V = self._divergence(r.A_L * r.gV, s.A_L * s.gV)
            self.lin_W = self._divergence(r.A_L * r.gW, s.A_L * s.gW)

        self.free = np.zeros(grid.shape, dtype=bool)
        self.free[1:-1, 1:-1] = True
        ii, jj = np.indices(grid.shape)
        self.colors = [self.free & ((ii + jj) % 2 == c) for c in (0, 1)]
        self.volumes = grid.cell_volumes()

        # axis edge: tie or pin factors per column
        self.k_u = np.where(self.kinds == TIE_U, 0.0, 1.0)
        self.t_w = np.where(self.kinds == TIE_W, 1.0, 0.5)
        self.k_w = np.where(self.kinds == TIE_W, 0.0, 1.0)

    def _divergence(self, flux_rho: np.ndarray, flux_z: np.ndarray) -> np.ndarray:
        """Outward flux sums at the nodes"""
        out = np.zeros(self.grid.shape)
        out[:-1] += flux_rho
        out[1:] -= flux_rho
        out[1:, :-1] += flux_z
        out[1:, 1:] -= flux_z
        return out

    @staticmethod
    def _edge_energy(e: EdgeSet, ua, ub, wa, wb) -> np.ndarray:
        du = (ub - ua) * e.inv_L
        dw = (wb - wa) * e.inv_L
        sh_dV = np.sinh(e.WB + 0.5 * (wa + wb)) * (e.gV + du)
        return 0.5 * e.A * (sh_dV ** 2 + du ** 2 + dw ** 2) - e.const

    @staticmethod
    def _edges(e: EdgeSet, ua, ub, wa, wb, hessian: bool = True) -> EdgeTerms:
        du = (ub - ua) * e.inv_L
        dw = (wb - wa) * e.inv_L
        dV = e.gV + du
        We = e.WB + 0.5 * (wa + wb)
        sh, ch = np.sinh(We), np.cosh(We)
        energy = 0.5 * e.A * (sh ** 2 * dV ** 2 + du ** 2 + dw ** 2) - e.const
        term_v = e.A_L * (sh ** 2 * dV + du)
        source = 0.5 * e.A * sh * ch * dV ** 2
        terms = EdgeTerms(energy, (-term_v, term_v), (source - e.A_L * dw, source + e.A_L * dw))
        if hessian:
            huu = e.A_L2 * ch ** 2
            huw = e.A_L * sh * ch * dV
            hww = 0.25 * e.A * np.cosh(2 * We) * dV ** 2 + e.A_L2
            terms.huu, terms.huw, terms.hww = (huu, huu), (-huw, huw), (hww, hww)
        return terms

    def edge_terms(self, u: np.ndarray, w: np.ndarray, hessian: bool = True) -> Tuple[EdgeTerms, EdgeTerms]:
        """rho-edge and z-edge terms for filled arrays (axis row applied)"""
        rho_terms = self._edges(self.rho_edges, u[:-1], u[1:], w[:-1], w[1:], hessian)
        z_terms = self._edges(self.z_edges, u[1:, :-1], u[1:, 1:], w[1:, :-1], w[1:, 1:], hessian)
        return rho_terms, z_terms

    def edge_energies(self, u: np.ndarray, w: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        return (self._edge_energy(self.rho_edges, u[:-1], u[1:], w[:-1], w[1:]),
                self._edge_energy(self.z_edges, u[1:, :-1], u[1:, 1:], w[1:, :-1], w[1:, 1:]))

    def fill_axis(self, u: np.ndarray, w: np.ndarray) -> None:
        u[0] = np.where(self.kinds == TIE_U, u[1], 0.0)
        w[0] = np.where(self.kinds == TIE_W, w[1], 0.0)

    def node_energy(self, u: np.ndarray, w: np.ndarray) -> np.ndarray:
        """Each free node's share of J: adjacent edges plus its linear term"""
        rho_e, z_e = self.edge_energies(u, w)
        return self._gather(rho_e, rho_e, z_e, z_e) - (u * self.lin_V + w * self.lin_W)

    def node_energy_allowance(self, u: np.ndarray, w: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """node_energy and its roundoff level, a few ulps of the summed term magnitudes"""
        rho_e, z_e = self.edge_energies(u, w)
        linear = u * self.lin_V + w * self.lin_W
        mag_rho = np.abs(rho_e) + 2 * self.rho_edges.const
        mag_z = np.abs(z_e) + 2 * self.z_edges.const
        magnitude = self._gather(mag_rho, mag_rho, mag_z, mag_z) + np.abs(linear)
        return self._gather(rho_e, rho_e, z_e, z_e) - linear, ROUNDING_ULPS * np.finfo(float).eps * magnitude

    def total_energy(self, u: np.ndarray, w: np.ndarray) -> float:
        rho_e, z_e = self.edge_energies(u, w)
        return self._sum_energy(rho_e, z_e, u, w)

    def _sum_energy(self, rho_e, z_e, u, w) -> float:
        linear = np.sum(np.where(self.free, u * self.lin_V + w * self.lin_W, 0.0))
        return float(np.sum(rho_e) + np.sum(z_e) - linear)

    def _gather(self, rho_a, rho_b, z_a, z_b) -> np.ndarray:
        out = np.zeros(self.grid.shape)
        out[:-1] += rho_a
        out[1:] += rho_b
        out[1:, :-1] += z_a
        out[1:, 1:] += z_b
        return out

    def derivatives(self, u: np.ndarray, w: np.ndarray, hessian: bool = True) -> Tuple[np.ndarray, ...]:
        """
        Gradient and 2x2 Hessian diagonal blocks of J at every node

        Returns:
            tuple: (gu, gw, huu, huw, hww), or (gu, gw) without the Hessian;
                only free nodes are meaningful
        """
        rho_terms, z_terms = self.edge_terms(u, w, hessian)
        return self._derivatives(rho_terms, z_terms, u, w, hessian)

    def _derivatives(self, rho_terms: EdgeTerms, z_terms: EdgeTerms, u, w, hessian: bool):
        axis = self._axis_terms(u, w)
        names = ('gu', 'gw', 'huu', 'huw', 'hww') if hessian else ('gu', 'gw')
        out = []
        for k, name in enumerate(names):
            rho_a, rho_b = getattr(rho_terms, name)
            z_a, z_b = getattr(z_terms, name)
            # the axis edge reaches row 1 through the tie or pin of each column
            rho_b = rho_b.copy()
            rho_b[0] = axis[k]
            out.append(self._gather(rho_a, rho_b, z_a, z_b))
        out[0] -= self.lin_V
        out[1] -= self.lin_W
        return tuple(out)

    def _axis_terms(self, u: np.ndarray, w: np.ndarray) -> Tuple[np.ndarray, ...]:
        """Derivatives of the axis edge energy with respect to the row 1 values"""
        e = self.rho_edges
        A, L = e.A[0], e.L[0]
        du = (u[1] - u[0]) / L
        dw = (w[1] - w[0]) / L
        dV = e.gV[0] + du
        We = e.WB[0] + 0.5 * (w[0] + w[1])
        sh, ch = np.sinh(We), np.cosh(We)
        k_u, t_w, k_w = self.k_u, self.t_w, self.k_w
        gu = A * k_u / L * (sh ** 2 * dV + du)
        gw = A * (t_w * sh * ch * dV ** 2 + k_w * dw / L)
        huu = A * k_u * ch ** 2 / L ** 2
        huw = A * k_u / L * 2 * sh * ch * t_w * dV
        hww = A * (t_w ** 2 * np.cosh(2 * We) * dV ** 2 + k_w / L ** 2)
        return gu, gw, huu, huw, hww

    def _scaled(self, gu: np.ndarray, gw: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        with np.errstate(divide='ignore', invalid='ignore'):
            R_V = np.where(self.free, -gu / self.volumes, 0.0)
            R_W = np.where(self.free, -gw / self.volumes, 0.0)
        return R_V, R_W

    def residual(self, u: np.ndarray, w: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        return self._scaled(*self.derivatives(u, w, hessian=False))

    def residual_and_energy(self, u: np.ndarray, w: np.ndarray) -> Tuple[float, float]:
        """Sup-norm residual and total J from one pass over the edges"""
        rho_terms, z_terms = self.edge_terms(u, w, hessian=False)
        R_V, R_W = self._scaled(*self._derivatives(rho_terms, z_terms, u, w, hessian=False))
        res = float(max(np.max(np.abs(R_V)), np.max(np.abs(R_W))))
        return res, self._sum_energy(rho_terms.energy, z_terms.energy, u, w)


def residual(fld: HyperbolicField) -> Tuple[np.ndarray, np.ndarray]:
    """
    Harmonic map residuals at the free nodes

    Args:
        fld: Field on its grid

    Returns:
        tuple: (R_V, R_W) grids, discretizing div(cosh^2 W grad V) and
            Delta W - sinh W cosh W |grad V|^2; zero on the axis and outer boundary
    """
    op = HarmonicMapOperator(fld)
    return op.residual(fld.u, fld.w)


def residual_norm(fld: HyperbolicField) -> float:
    R_V, R_W = residual(fld)
    return float(max(np.max(np.abs(R_V)), np.max(np.abs(R_W))))


def discrete_energy(fld: HyperbolicField) -> float:
    """Discrete reduced energy of the field against its model map"""
    return HarmonicMapOperator(fld).total_energy(fld.u, fld.w)


def _newton_step(gu, gw, huu, huw, hww):
    det = huu * hww - huw ** 2
    definite = (huu > 0) & (hww > 0) & (det > 1e-14 * np.abs(huu * hww))
    with np.errstate(divide='ignore', invalid='ignore'):
        newton_u = (-gu * hww + gw * huw) / det
        newton_w = (-gw * huu + gu * huw) / det
        diag_u = np.where(huu > 0, -gu / huu, 0.0)
        diag_w = np.where(hww > 0, -gw / hww, 0.0)
    return np.where(definite, newton_u, diag_u), np.where(definite, newton_w, diag_w)


def _descend(op: HarmonicMapOperator, u, w, mask, step_u, step_w, reference, current):
    """
    Backtrack each masked node until its share of J is at most reference
    (reference already includes the rounding allowance)

    Returns:
        tuple: (u, w, energy, full); energy is the node share after the
            accepted steps and full marks nodes that took the whole step
    """
    scale = np.ones_like(u)
    pending = mask.copy()
    new_u, new_w = u.copy(), w.copy()
    energy = current.copy()
    for _ in range(BACKTRACK_STEPS):
        if not pending.any():
            break
        trial_u = np.where(pending, u + scale * step_u, new_u)
        trial_w = np.where(pending, w + scale * step_w, new_w)
        op.fill_axis(trial_u, trial_w)
        trial_energy = op.node_energy(trial_u, trial_w)
        accepted = pending & (trial_energy <= reference)
        new_u = np.where(accepted, trial_u, new_u)
        new_w = np.where(accepted, trial_w, new_w)
        energy = np.where(accepted, trial_energy, energy)
        pending &= ~accepted
        scale = np.where(pending, 0.5 * scale, scale)
    op.fill_axis(new_u, new_w)
    return new_u, new_w, energy, mask & ~pending & (scale == 1.0)


def _half_sweep(op: HarmonicMapOperator, u, w, mask, cfg: SolverConfig):
    start_u, start_w = u, w
    start_energy, allowance = op.node_energy_allowance(u, w)
    reference = start_energy + allowance
    current = start_energy
    for _ in range(cfg.newton_iterations):
        gu, gw, huu, huw, hww = op.derivatives(u, w)
        step_u, step_w = _newton_step(gu, gw, huu, huw, hww)
        predicted = gu * step_u + gw * step_w + 0.5 * (huu * step_u ** 2 + 2 * huw * step_u * step_w
                                                       + hww * step_w ** 2)
        u, w, energy, full = _descend(op, u, w, mask, step_u, step_w, reference, current)
        # the quadratic model held over the whole step: the node sits at its minimizer
        settled = full & (np.abs(energy - current - predicted) <= MODEL_MATCH * np.abs(predicted) + allowance)
        current = energy
        if np.all(settled | ~mask):
            break
        reference = np.minimum(current + allowance, start_energy + allowance)

    if cfg.omega != 1.0:
        # over-relaxed point, kept where it does not raise J above the start of the half-sweep
        trial_u = np.where(mask, start_u + cfg.omega * (u - start_u), u)
        trial_w = np.where(mask, start_w + cfg.omega * (w - start_w), w)
        op.fill_axis(trial_u, trial_w)
        keep = mask & (op.node_energy(trial_u, trial_w) <= start_energy + allowance)
        u = np.where(keep, trial_u, u)
        w = np.where(keep, trial_w, w)
        op.fill_axis(u, w)
    return u, w


def relax(fld: HyperbolicField, cfg: Optional[SolverConfig] = None) -> HyperbolicField:
    """
    Relax a field to a discrete harmonic map with its outer values held fixed

    Args:
        fld: Starting field; its outer boundary values are the Dirichlet data
        cfg: Solver settings

    Returns:
        HyperbolicField: Converged field with diagnostics attached
    """
    cfg = cfg or SolverConfig()
    op = HarmonicMapOperator(fld)
    u, w = fld.u.copy(), fld.w.copy()
    op.fill_axis(u, w)

    res, energy = op.residual_and_energy(u, w)
    history = [energy]
    best = (res, u.copy(), w.copy())
    sweeps = 0
    while res > cfg.tolerance and sweeps < cfg.max_sweeps:
        for mask in op.colors:
            u, w = _half_sweep(op, u, w, mask, cfg)
        sweeps += 1
        res, energy = op.residual_and_energy(u, w)
        slack = config.SOLVER_ENERGY_SLACK * max(1.0, abs(history[-1]))
        if energy > history[-1] + slack:
            logger.warning(f"Sweep {sweeps}: energy rose from {history[-1]:.12g} to {energy:.12g}")
        history.append(energy)
        if res < best[0]:
            best = (res, u.copy(), w.copy())
        if sweeps % 100 == 0:
            logger.debug(f"Sweep {sweeps}: residual {res:.3e}, energy {energy:.12g}")

    converged = res <= cfg.tolerance
    diagnostics = SolverDiagnostics(sweeps=sweeps, residual=res, converged=converged, energy_history=history)
    if not converged:
        best_field = HyperbolicField(fld.grid, fld.model, best[1], best[2],
                                     SolverDiagnostics(sweeps, best[0], False, history))
        raise ConvergenceError(
            f"Relaxation stopped after {sweeps} sweeps with residual {res:.3e} > {cfg.tolerance:.1e}",
            {'sweeps': sweeps, 'residual': res, 'best_residual': best[0],
             'energy_history': history, 'field': best_field})

    logger.info(f"Relaxation converged in {sweeps} sweeps, residual {res:.3e}")
    return HyperbolicField(fld.grid, fld.model, u, w, diagnostics)
