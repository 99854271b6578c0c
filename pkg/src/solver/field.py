"""
Hyperbolic Fields

This module implements the discretized map (V, W) into the hyperbolic
plane. The stored unknowns are the differences u = V - V_bar and
w = W - W_bar from a model map, which stay finite on the axis row. The
axis row is not an unknown: on each column it is tied to the first row or
pinned to zero according to the rod the axis node lies on.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np

from src.defects.angles import rod_case
from src.exceptions import ClassMismatchError, DomainError
from src.geometry.field_io import FieldDump, dump_fields, load_fields
from src.geometry.reduction import HyperbolicPoint, reduce_torus_matrix
from src.solver.grid import SolverGrid
from src.solver.model_map import ModelMap

logger = logging.getLogger(__name__)

# Axis column kinds: which difference is tied to the first row (Neumann)
# and which is pinned to zero (Dirichlet)
TIE_U = 'tie_u'  # case I and II_0: u even, w = 0
TIE_W = 'tie_w'  # case III and II_beta: u = 0, w even
PINNED = 'pinned'  # turning points: u = w = 0


def axis_kinds(model: ModelMap, z: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """
    Axis condition of every grid column

    Args:
        model: Model map (supplies rods and twist)
        z: Column positions

    Returns:
        np.ndarray: Array of TIE_U / TIE_W / PINNED strings
    """
    kinds = []
    corners = np.asarray(model.rods.turning_points, dtype=float)
    for zj in np.asarray(z, dtype=float):
        if corners.size and np.min(np.abs(corners - zj)) <= tol * max(1.0, abs(zj)):
            kinds.append(PINNED)
            continue
        case = rod_case(model.rods.rod_at(zj).structure, model.beta_ell)
        kinds.append(TIE_U if case in ('I', 'II_0') else TIE_W)
    return np.array(kinds)


@dataclass
class SolverDiagnostics:
    """Outcome of a relaxation run"""
    sweeps: int
    residual: float
    converged: bool
    energy_history: List[float] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {'sweeps': self.sweeps, 'residual': self.residual, 'converged': self.converged,
                'energy_history': list(self.energy_history)}


@dataclass
class HyperbolicField:
    """Map into the hyperbolic plane stored as differences from a model map"""
    grid: SolverGrid
    model: ModelMap
    u: np.ndarray
    w: np.ndarray
    diagnostics: Optional[SolverDiagnostics] = None

    def __post_init__(self):
        self.u = np.array(self.u, dtype=float)
        self.w = np.array(self.w, dtype=float)
        if self.u.shape != self.grid.shape or self.w.shape != self.grid.shape:
            raise DomainError(f"Field arrays must have the grid shape {self.grid.shape}")
        if not (np.all(np.isfinite(self.u)) and np.all(np.isfinite(self.w))):
            raise DomainError("Field differences must be finite at every node")
        self.kinds = axis_kinds(self.model, self.grid.z)
        self.apply_axis()

    @property
    def asymptotic_class(self):
        return self.model.asymptotic_class

    def apply_axis(self) -> None:
        """Fill the axis row from the first row according to the column kinds"""
        self.u[0] = np.where(self.kinds == TIE_U, self.u[1], 0.0)
        self.w[0] = np.where(self.kinds == TIE_W, self.w[1], 0.0)

    def copy(self) -> 'HyperbolicField':
        return HyperbolicField(self.grid, self.model, self.u.copy(), self.w.copy())

    def model_values(self):
        """(V_bar, W_bar) on the rows off the axis"""
        rho, z = self.grid.mesh()
        return self.model.values(rho[1:], z[1:])

    def point(self) -> HyperbolicPoint:
        """(V, W) on the rows off the axis"""
        V_bar, W_bar = self.model_values()
        return HyperbolicPoint(V_bar + self.u[1:], W_bar + self.w[1:])

    def check_compatible(self, other: 'HyperbolicField') -> None:
        if not self.grid.same_as(other.grid):
            raise DomainError("Fields live on different grids")
        if not self.model.rods.same_rods(other.model.rods, tol=1e-12):
            raise ClassMismatchError(f"Fields have different rods: {self.model.rods} vs {other.model.rods}")

    def to_dump(self, alpha=None) -> FieldDump:
        """
        Field dump of the rows off the axis

        Z is written as 0 (det G = rho^2 for these maps); alpha is taken
        from the model's geometry when it has one, else written as 0.
        """
        rho, z = self.grid.mesh()
        p = self.point()
        if alpha is None:
            family = self.model.family
            alpha = family.alpha(rho[1:], z[1:]) if family is not None else np.zeros_like(p.V)
        cls = self.asymptotic_class
        return FieldDump(rho=rho[1:], z=z[1:], V=p.V, W=p.W, Z=np.zeros_like(p.V), alpha=alpha,
                         asymptotic_class=cls.label(), beta=cls.beta, ell=cls.ell,
                         extra={'model': self.model.source})


def sample_field(source, grid: SolverGrid, model: ModelMap) -> HyperbolicField:
    """
    Sample an exact geometry (or a (V, W) callable) on a grid

    Args:
        source: Family with sample_brill, or a function (rho, z) -> (V, W)
        grid: Solver grid
        model: Model map providing the reference singularities

    Returns:
        HyperbolicField: Differences from the model
    """
    rho, z = grid.mesh()
    r, zz = rho[1:], z[1:]
    if hasattr(source, 'sample_brill'):
        _, p = reduce_torus_matrix(source.sample_brill(r, zz).G, r, model.beta_ell)
        V, W = p.V, p.W
    else:
        V, W = source(r, zz)
    V_bar, W_bar = model.values(r, zz)
    u = np.zeros(grid.shape)
    w = np.zeros(grid.shape)
    u[1:] = V - V_bar
    w[1:] = W - W_bar
    return HyperbolicField(grid, model, u, w)


def model_field(grid: SolverGrid, model: ModelMap) -> HyperbolicField:
    """The model map itself (zero differences)"""
    return HyperbolicField(grid, model, np.zeros(grid.shape), np.zeros(grid.shape))


def save_checkpoint(fld: HyperbolicField, path: Union[str, Path]) -> str:
    """Write a field to the CSV field format and return the path"""
    dump_fields(fld.to_dump(), path)
    return str(path)


def load_checkpoint(path: Union[str, Path], model: ModelMap) -> HyperbolicField:
    """
    Read a checkpoint written by save_checkpoint back onto its grid

    Args:
        path: CSV field dump
        model: Model map the field was solved against

    Returns:
        HyperbolicField: Field with the recorded values off the axis
    """
    dump = load_fields(path)
    if dump.rho.ndim != 2:
        raise DomainError(f"Checkpoint {path} is not a grid dump")
    rho = np.concatenate([[0.0], dump.rho[:, 0]])
    grid = SolverGrid(rho, dump.z[0])
    fld = sample_field(lambda r, z: (dump.V, dump.W), grid, model)
    logger.info(f"Loaded checkpoint {path} on a {grid.shape[0]}x{grid.shape[1]} grid")
    return fld
