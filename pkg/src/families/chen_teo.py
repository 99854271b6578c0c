"""
Chen-Teo Asymptotic Data

This module implements the two-parameter Chen-Teo family through its
asymptotic data only: the circle length ell, the twist beta, the leading
coefficients of e^{2 alpha} and V, and the closed-form mass.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict

from src.exceptions import DomainError
from src.families.base import require
from src.families.models import FlatAF
from src.rods import AsymptoticClass

logger = logging.getLogger(__name__)

XI_MIN = 0.5
XI_MAX = 1 / math.sqrt(2)


@dataclass(frozen=True)
class ChenTeoAsymptotic:
    """
    Chen-Teo instanton with scale kappa > 0 and shape xi in (1/2, 1/sqrt 2)

    Near infinity e^{2 alpha} = ell^-2 (1 + A/r + ...) and
    V = log(rho / ell^2) + B/r + ..., which gives mass 2 pi ell (2A - B).
    """
    kappa: float
    xi: float
    key: str = field(default='chen-teo', init=False)
    ricci_flat: bool = field(default=True, init=False)

    def __post_init__(self):
        require(self.kappa > 0, f"Chen-Teo needs kappa > 0, got {self.kappa}")
        require(XI_MIN < self.xi < XI_MAX, f"Chen-Teo needs xi in (1/2, 1/sqrt(2)), got {self.xi}")

    @property
    def _root(self) -> float:
        return math.sqrt(1 - 4 * self.xi ** 4)

    @property
    def ell(self) -> float:
        xi = self.xi
        return 8 * math.sqrt(self.kappa) * xi ** 4 / (self._root * (2 * xi ** 2 - 2 * xi + 1) ** 2)

    @property
    def beta(self) -> float:
        xi = self.xi
        return (1 - xi) ** 2 * self._root / (2 * math.sqrt(self.kappa) * xi ** 2)

    @property
    def alpha_coefficient(self) -> float:
        """A in e^{2 alpha} = ell^-2 (1 + A/r + ...)"""
        xi2 = self.xi ** 2
        return (1 + 2 * xi2) * math.sqrt(self.kappa * (1 - 4 * xi2 ** 2)) / (1 - 2 * xi2)

    @property
    def v_coefficient(self) -> float:
        """B in V = log(rho / ell^2) + B/r + ..."""
        return math.sqrt(self.kappa) * (1 + 2 * self.xi ** 2) ** 2 / self._root

    def params(self) -> Dict[str, float]:
        return {'kappa': self.kappa, 'xi': self.xi}

    def label(self) -> str:
        return f"ChenTeoAsymptotic(kappa={self.kappa:g}, xi={self.xi:g})"

    def asymptotic_class(self) -> AsymptoticClass:
        return AsymptoticClass.af(self.beta, self.ell)

    def model(self) -> FlatAF:
        return FlatAF(self.beta, self.ell)

    def exact_mass(self) -> float:
        """2 pi ell (1 + 2 xi^2)^2 sqrt(kappa) / sqrt(1 - 4 xi^4)"""
        return 2 * math.pi * self.ell * (1 + 2 * self.xi ** 2) ** 2 * math.sqrt(self.kappa) / self._root

    def substituted_mass(self) -> float:
        """The closed form with ell substituted"""
        xi = self.xi
        return (16 * math.pi * self.kappa * xi ** 4 * (1 + 2 * xi ** 2) ** 2
                / ((1 - 4 * xi ** 4) * (2 * xi ** 2 - 2 * xi + 1) ** 2))

    def expansion_mass(self) -> float:
        """Mass read off the asymptotic expansion"""
        return 2 * math.pi * self.ell * (2 * self.alpha_coefficient - self.v_coefficient)

    def derived(self) -> Dict[str, Any]:
        return {
            'ell': self.ell, 'beta': self.beta,
            'A': self.alpha_coefficient, 'B': self.v_coefficient,
            'asymptotic_class': self.asymptotic_class().label(),
        }

    def rod_data(self):
        raise DomainError("Chen-Teo is available through its asymptotic data only")

    def sample_brill(self, rho, z, method: str = 'closed'):
        raise DomainError("Chen-Teo is available through its asymptotic data only")

    def coordinate_transform(self, r, theta):
        return self.model().coordinate_transform(r, theta)
