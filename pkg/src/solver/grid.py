"""
Solver Grid

This module implements the solver configuration record and the tensor
product grid on [0, rho_max] x [-z_max, z_max]. The rho nodes are graded
toward the axis, rho_i = rho_max (i / (n - 1))^grading, and the first row
is the axis itself.
"""

import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from src import config
from src.exceptions import DomainError

logger = logging.getLogger(__name__)


class SolverConfig(BaseModel):
    """Relaxation settings and grid layout"""
    model_config = ConfigDict(extra='forbid')

    tolerance: float = Field(config.SOLVER_TOLERANCE, gt=0, description="sup-norm residual target")
    max_sweeps: int = Field(config.SOLVER_MAX_SWEEPS, ge=1)
    omega: float = Field(config.SOLVER_OMEGA, gt=0, lt=2, description="over-relaxation factor")
    newton_iterations: int = Field(config.SOLVER_NEWTON_ITER, ge=1, le=20)
    n_rho: int = Field(config.SOLVER_GRID[0], ge=5)
    n_z: int = Field(config.SOLVER_GRID[1], ge=5)
    rho_max: float = Field(config.SOLVER_RHO_MAX, gt=0)
    z_max: float = Field(config.SOLVER_Z_MAX, gt=0)
    grading: float = Field(config.SOLVER_GRADING, ge=1, le=4)

    @field_validator('n_z')
    @classmethod
    def odd_columns(cls, value: int) -> int:
        # keeps z = 0 on a node, where the flat models have their corner
        if value % 2 == 0:
            raise ValueError(f"n_z must be odd, got {value}")
        return value

    def grid(self) -> 'SolverGrid':
        return SolverGrid.graded(self.n_rho, self.n_z, self.rho_max, self.z_max, self.grading)


def parse_grid(text: str) -> Tuple[int, int]:
    """
    Parse a grid size of the form NxM

    Args:
        text: e.g. '129x257' (n_rho x n_z)

    Returns:
        tuple: (n_rho, n_z)
    """
    parts = text.lower().replace('*', 'x').split('x')
    try:
        n_rho, n_z = (int(p) for p in parts)
    except ValueError as e:
        raise DomainError(f"Grid must look like 129x257, got {text!r}") from e
    return n_rho, n_z


@dataclass(frozen=True)
class SolverGrid:
    """Graded tensor product nodes; arrays on the grid have shape (n_rho, n_z)"""
    rho: np.ndarray
    z: np.ndarray

    def __post_init__(self):
        rho = np.asarray(self.rho, dtype=float)
        z = np.asarray(self.z, dtype=float)
        if rho.ndim != 1 or z.ndim != 1 or rho.size < 3 or z.size < 3:
            raise DomainError("Solver grid needs at least three nodes in each direction")
        if rho[0] != 0.0 or np.any(np.diff(rho) <= 0):
            raise DomainError("rho nodes must start on the axis and increase")
        if np.any(np.diff(z) <= 0):
            raise DomainError("z nodes must increase")
        object.__setattr__(self, 'rho', rho)
        object.__setattr__(self, 'z', z)

    @classmethod
    def graded(cls, n_rho: int, n_z: int, rho_max: float, z_max: float,
               grading: float = config.SOLVER_GRADING) -> 'SolverGrid':
        rho = rho_max * np.linspace(0.0, 1.0, n_rho) ** grading
        z = np.linspace(-z_max, z_max, n_z)
        return cls(rho, z)

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.rho.size, self.z.size)

    def mesh(self) -> Tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.rho, self.z, indexing='ij')

    @property
    def rho_widths(self) -> np.ndarray:
        """Dual cell widths in rho; the axis row has none"""
        edges = np.concatenate([[0.0], 0.5 * (self.rho[:-1] + self.rho[1:]), [self.rho[-1]]])
        widths = np.diff(edges)
        widths[0] = 0.0
        return widths

    @property
    def z_widths(self) -> np.ndarray:
        edges = np.concatenate([[self.z[0]], 0.5 * (self.z[:-1] + self.z[1:]), [self.z[-1]]])
        return np.diff(edges)

    def cell_volumes(self) -> np.ndarray:
        """2 pi rho_i drho_i dz_j for every node"""
        return 2 * np.pi * np.outer(self.rho * self.rho_widths, self.z_widths)

    def same_as(self, other: 'SolverGrid') -> bool:
        return (self.shape == other.shape and np.array_equal(self.rho, other.rho)
                and np.array_equal(self.z, other.z))

    def refined(self) -> 'SolverGrid':
        """Grid with every interval halved"""
        def halve(x):
            mid = 0.5 * (x[:-1] + x[1:])
            out = np.empty(2 * x.size - 1)
            out[0::2], out[1::2] = x, mid
            return out
        return SolverGrid(halve(self.rho), halve(self.z))
