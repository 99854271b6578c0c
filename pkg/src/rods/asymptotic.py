"""
Asymptotic Classes and End Topology

This module implements the ALE/ALF/AF asymptotic class descriptor and the
classification of the cross-sectional topology at infinity from the two
semi-infinite rod structures.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

from src.exceptions import DomainError, RodDataError
from src.rods.rod_data import RodDataSet, RodStructure

logger = logging.getLogger(__name__)

ALE = 'ALE'
ALF = 'ALF'
AF = 'AF'

# Default decay exponents of g - b used to seed the mass fits
DEFAULT_DECAY = {ALE: 2.0, ALF: 1.0, AF: 1.0}


@dataclass(frozen=True)
class AsymptoticClass:
    """
    Asymptotic model class of an end

    ALE carries the lens space data (p, q); ALF carries the Chern number k
    and the circle length ell; AF carries ell and the twist beta.
    """
    tag: str
    p: int = 1
    q: int = 0
    k: int = 0
    ell: float = 1.0
    beta: float = 0.0
    decay_rate: Optional[float] = None

    def __post_init__(self):
        if self.tag not in (ALE, ALF, AF):
            raise DomainError(f"Unknown asymptotic class {self.tag!r}")
        if self.tag == ALE:
            if self.p < 1 or math.gcd(self.p, abs(self.q)) != 1:
                raise DomainError(f"ALE class needs p >= 1 and gcd(p,q) = 1, got p={self.p}, q={self.q}")
        else:
            if not self.ell > 0:
                raise DomainError(f"{self.tag} class needs ell > 0, got {self.ell}")
            if self.tag == ALF and self.k < 1:
                raise DomainError(f"ALF class needs an integer k >= 1, got {self.k}")
        if self.decay_rate is None:
            object.__setattr__(self, 'decay_rate', DEFAULT_DECAY[self.tag])
        if not self.decay_rate > 0:
            raise DomainError(f"Decay rate must be positive, got {self.decay_rate}")

    @classmethod
    def ale(cls, p: int, q: int, decay_rate: Optional[float] = None) -> 'AsymptoticClass':
        return cls(ALE, p=p, q=q, decay_rate=decay_rate)

    @classmethod
    def alf(cls, k: int, ell: float, beta: float = 0.0, decay_rate: Optional[float] = None) -> 'AsymptoticClass':
        return cls(ALF, k=k, ell=ell, beta=beta, decay_rate=decay_rate)

    @classmethod
    def af(cls, beta: float, ell: float, decay_rate: Optional[float] = None) -> 'AsymptoticClass':
        return cls(AF, ell=ell, beta=beta, decay_rate=decay_rate)

    @property
    def beta_ell(self) -> float:
        return 0.0 if self.tag == ALE else self.beta * self.ell

    def end_structures(self) -> Tuple[RodStructure, RodStructure]:
        """Semi-infinite rod structures of the flat model of this class"""
        if self.tag == ALE:
            return RodStructure(0, 1), RodStructure(self.p, -self.q)
        if self.tag == AF:
            return RodStructure(1, 0), RodStructure(1, 0)
        twist = 1.0 + self.k * self.beta * self.ell
        if abs(twist - round(twist)) > 1e-9:
            raise DomainError(f"ALF end is not a manifold end: 1 + k*beta*ell = {twist} is not an integer")
        a, b = -int(round(twist)), self.k
        g = math.gcd(abs(a), abs(b))
        return RodStructure(1, 0), RodStructure(a // g, b // g)

    def matches(self, rods: RodDataSet) -> bool:
        """True when the semi-infinite rods agree with this class up to sign"""
        first, last = self.end_structures()

        def same(u: RodStructure, v: RodStructure) -> bool:
            return u.as_tuple() in (v.as_tuple(), (-v.v1, -v.v2))

        return same(rods.first, first) and same(rods.last, last)

    def label(self) -> str:
        if self.tag == ALE:
            return f"ALE({self.p},{self.q})"
        if self.tag == ALF:
            return f"ALF({self.k},{self.ell:g})"
        return f"AF({self.beta:g},{self.ell:g})"


@dataclass(frozen=True)
class CrossSection:
    """Topology of the cross-section at infinity: S1xS2 or a lens space L(p,q)"""
    kind: str  # 'S1xS2' or 'lens'
    p: int = 0
    q: int = 0

    def canonical(self) -> 'CrossSection':
        """Representative invariant under orientation and basis choices"""
        if self.kind != 'lens' or self.p <= 1:
            return self
        inverse = pow(self.q, -1, self.p)
        q = min(x % self.p for x in (self.q, -self.q, inverse, -inverse))
        return CrossSection('lens', self.p, q)

    @property
    def is_sphere(self) -> bool:
        return self.kind == 'lens' and self.p == 1

    def __str__(self) -> str:
        return "S1xS2" if self.kind == 'S1xS2' else f"L({self.p},{self.q})"


def extended_gcd(a: int, b: int) -> Tuple[int, int, int]:
    """
    Extended Euclidean algorithm

    Returns:
        tuple: (g, x, y) with a*x + b*y = g = gcd(|a|, |b|)
    """
    old_r, r = abs(a), abs(b)
    old_x, x = 1, 0
    old_y, y = 0, 1
    while r:
        quotient = old_r // r
        old_r, r = r, old_r - quotient * r
        old_x, x = x, old_x - quotient * x
        old_y, y = y, old_y - quotient * y
    sign_a = -1 if a < 0 else 1
    sign_b = -1 if b < 0 else 1
    return old_r, sign_a * old_x, sign_b * old_y


def normalizing_matrix(v: RodStructure) -> Tuple[Tuple[int, int], Tuple[int, int]]:
    """
    Unimodular integer matrix sending v to (1,0)

    Args:
        v: Coprime rod structure

    Returns:
        tuple: 2x2 integer matrix with determinant 1
    """
    g, x, y = extended_gcd(v.v1, v.v2)
    if g != 1:
        raise RodDataError(f"Rod structure {v} cannot be normalized: components are not relatively prime")
    return ((x, y), (-v.v2, v.v1))


def asymptotic_topology(rods: RodDataSet) -> CrossSection:
    """
    Classify the cross-section at infinity

    Args:
        rods: Rod data set

    Returns:
        CrossSection: S1xS2 or L(p,q) with 1 <= q <= p
    """
    matrix = normalizing_matrix(rods.first)
    last = rods.last
    if last.problems():
        raise RodDataError(f"Last rod structure {last} cannot be normalized: {last.problems()[0]}")

    w = last.transformed(matrix)
    q, p = w.v1, w.v2
    if p == 0:
        result = CrossSection('S1xS2')
    else:
        if p < 0:
            p, q = -p, -q
        q = q % p or p
        result = CrossSection('lens', p, q)
    logger.debug(f"Cross-section of {rods} is {result}")
    return result
